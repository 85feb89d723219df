#include "llb/cli.hpp"

int main(int argc, char** argv) { return llb::cli_main(argc, argv); }

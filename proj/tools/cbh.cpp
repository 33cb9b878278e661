#include "cbh/cli.hpp"

int main(int argc, char** argv) { return cbh::cli_main(argc, argv); }

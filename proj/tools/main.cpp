#include "lowlat/cli.hpp"

int main(int argc, char** argv) { return lowlat::cli_main(argc, argv); }

#include "curvespace/cli.hpp"

int main(int argc, char** argv) { return curvespace::cli_main(argc, argv); }

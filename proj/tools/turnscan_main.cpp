#include "turnscan/cli.hpp"

int main(int argc, char** argv) { return turnscan::cli_main(argc, argv); }

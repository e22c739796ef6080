#include "polyq/cli.hpp"

int main(int argc, char** argv) { return polyq::run_cli(argc, argv); }

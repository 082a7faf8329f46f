#include "cfrank/cli.hpp"

int main(int argc, char** argv) { return cfrank::cli::run(argc, argv); }

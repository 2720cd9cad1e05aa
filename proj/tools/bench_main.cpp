#include "dfo/bench.hpp"

int main(int argc, char** argv) { return dfo::bench::run_cli(argc, argv); }

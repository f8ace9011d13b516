#include "cli.hpp"

int main(int argc, char** argv) { return spikeflow::cli::run(argc, argv); }

#include "thermistor/cli.hpp"

int main(int argc, char** argv) { return thermistor::cli::run_cli(argc, argv); }

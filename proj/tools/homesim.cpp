#include "homesim/cli/cli.hpp"

int main(int argc, char** argv) { return homesim::cli::dispatch(argc, argv); }

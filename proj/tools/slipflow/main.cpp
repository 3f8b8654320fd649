#include "cli.hpp"

int main(int argc, char** argv) { return slipflow::cli::run(argc, argv); }

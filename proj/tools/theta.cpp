#include "theta/cli.hpp"

int main(int argc, char** argv) { return theta::cli::run(argc, argv); }

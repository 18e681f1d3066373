#include "afdx/cli.hpp"

int main(int argc, char** argv) { return afdx::cli::run(argc, argv); }

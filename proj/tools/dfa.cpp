#include "dfa/cli.hpp"

int main(int argc, char** argv) { return dfa::cli::run(argc, argv); }

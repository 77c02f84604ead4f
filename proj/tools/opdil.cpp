#include "opdil/cli.hpp"

int main(int argc, char** argv) { return opdil::cli::run(argc, argv); }

#include "avrd/cli.hpp"

int main(int argc, char** argv) { return avrd::cli::run(argc, argv); }

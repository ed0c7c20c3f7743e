#include "laa/cli.hpp"

int main(int argc, char** argv) { return laa::cli::run(argc, argv); }

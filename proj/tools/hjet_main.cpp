#include "hjet/cli.hpp"

int main(int argc, char** argv) { return hjet::cli::run(argc, argv); }

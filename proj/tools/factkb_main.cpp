#include "factkb/cli.hpp"

int main(int argc, char** argv) { return factkb::cli::run(argc, argv); }

#include "faceverify/cli.hpp"

int main(int argc, char** argv) { return faceverify::cli::run(argc, argv); }

#include "dynip/cli.hpp"

int main(int argc, char** argv) { return dynip::cli::run(argc, argv); }

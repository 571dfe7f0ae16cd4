#include "cli.hpp"

int main(int argc, char** argv) { return copsum::cli::run(argc, argv); }

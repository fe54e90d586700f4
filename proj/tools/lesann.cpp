#include "lesann/cli.hpp"

int main(int argc, char** argv) { return lesann::cli::run(argc, argv); }

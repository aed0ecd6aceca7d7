#include "moser/cli.hpp"

int main(int argc, char** argv) { return moser::cli::run(argc, argv); }

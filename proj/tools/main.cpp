#include "commands.hpp"

int main(int argc, char** argv) { return crosc::cli::run_cli(argc, argv); }

#include "reqdep/cli.hpp"

int main(int argc, char** argv) { return reqdep::cli::dispatch(argc, argv); }

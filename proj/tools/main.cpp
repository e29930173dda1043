#include "runner.hpp"

int main(int argc, char** argv) { return holodisc::cli::run(argc, argv); }

#include "spantag/cli.hpp"

int main(int argc, char** argv) { return spantag::cli::run(argc, argv); }

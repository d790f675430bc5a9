#include "treespec/cli_app.hpp"
int main(){return 0;}

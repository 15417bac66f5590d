// Placeholder; subcommands land with the harness.
int main() { return 0; }

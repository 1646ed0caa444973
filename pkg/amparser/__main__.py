from amparser.cli import main

main()

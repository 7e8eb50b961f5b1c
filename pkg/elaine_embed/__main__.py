import sys

from elaine_embed.cli import main

if __name__ == "__main__":
    sys.exit(main())

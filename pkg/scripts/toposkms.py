# Lanceur de la CLI toposkms depuis la racine du dépôt
import os
import sys
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.main import main

if __name__ == '__main__':
    sys.exit(main())

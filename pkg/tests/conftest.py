import os
import sys

# the flat test modules import their helpers by module name
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

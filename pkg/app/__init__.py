"""
Tensor-train density estimation toolkit.
Importing the package loads a local .env so TDE_* settings apply to library use too.
"""
from dotenv import load_dotenv

load_dotenv()

__version__ = "0.1.0"

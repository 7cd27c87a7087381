"""Two-setting multipartite correlation Bell inequalities."""

from .inequalities import BellExpression, SignTable, mabk, prime_partner, svetlichny, uffink, wwzb_from_sign_table

__version__ = "0.1.0"

__all__ = ["BellExpression", "SignTable", "mabk", "prime_partner", "svetlichny", "uffink",
           "wwzb_from_sign_table", "__version__"]

"""A generalized syntax-directed editor engine.

Instantiate a structure editor for any abstract syntax given by sorts and
operators with binder arities; run editor-expression scripts under a
labelled small-step semantics; and validate the calculus's encoding into
a simply typed lambda-calculus with pairs, booleans, pattern matching and
fixed points.
"""

__version__ = "0.1.0"

"""Self-contained SMT solver speaking a subset of the SMT-LIB 2.6 protocol.

Covers quantifier-free linear integer/real arithmetic with uninterpreted
functions, predicates and sorts, plus quantified linear arithmetic via
quantifier elimination.  Runs as a subprocess (`ltlmt-smt` or
`python -m ltlmt.minismt`) reading commands from stdin.
"""

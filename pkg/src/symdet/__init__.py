"""Exact combinatorics for symmetric-circuit lower bounds on the determinant.

Modules: ``gf2`` (bit-packed GF(2) algebra), ``graphs`` (bipartite graphs,
matchings, separators), ``permgroup`` (permutations, groups, supports),
``exactalg`` (exact determinants and permanents), ``forge`` (base graphs with
an odd number of perfect matchings), ``cfi`` (gadget graphs and their
matrices), ``game`` (bijection games), ``circuits`` (symmetric circuits),
``pipeline`` and ``cli``.
"""

__version__ = "0.1.0"

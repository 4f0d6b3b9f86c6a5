"""
Exceções do domínio.

Todas herdam de ValueError para que chamadores que já tratam ValueError
continuem funcionando; a CLI converte CatError em exit code 2.
"""


class CatError(Exception):
    """Erro base do pacote."""


class DataError(CatError, ValueError):
    """Dados inválidos: CSV malformado, valores não finitos, dimensões insuficientes."""


class DegenerateError(CatError, ValueError):
    """Variância zero ou geometria degenerada (o log resultante seria -inf)."""


class InfeasibleConstraintsError(CatError, ValueError):
    """Nenhuma árvore direcionada satisfaz o conjunto de restrições."""

"""QImp: an imperative quantum mini-language with qubit ownership and borrowing."""

__version__ = "0.1.0"

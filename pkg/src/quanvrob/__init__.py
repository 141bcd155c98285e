"""quanvrob: quanvolutional vs classical feature extractors under gradient attacks."""

__version__ = "0.1.0"

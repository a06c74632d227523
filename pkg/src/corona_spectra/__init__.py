"""Essential spectra and Fredholm certificates for convolution-dominated
operators on discrete amenable groups."""

__version__ = "0.1.0"

"""Error-probability approximations for M-PSK and Gray-coded DQPSK over
AWGN and kappa-mu shadowed fading."""

__version__ = "0.1.0"

"""Desk-scale public-key encryption from high-corruption planted CSPs.

The pipeline: sample an expanding generator matrix whose code is a
Reed-Muller subcode (expandergen), plant a secret in a large-alphabet
constraint instance over it and publish the label-extended preimage matrix
(pkescheme), encrypt bits as noisy parities vs. uniform vectors, and decrypt
with the code's noisy-codeword/random distinguisher (rmcode). cspsampler
provides the underlying instance distributions and analysis the brute-force
oracles that check all of it at toy sizes.
"""

from .params import GenParams, SchemeParams, derive_gen_params, validate

__all__ = ["GenParams", "SchemeParams", "derive_gen_params", "validate"]
__version__ = "0.1.0"

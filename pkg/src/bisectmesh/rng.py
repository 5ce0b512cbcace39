"""Seeded 64-bit linear congruential generator.

Used for all random marking so that runs are reproducible from a single
integer seed and other implementations can replay identical sequences.
The recurrence is

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64

and draws take the top 31 bits (``state >> 33``).
"""

_MUL = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg:
    def __init__(self, seed: int = 0):
        self.state = seed & _MASK

    def next_u31(self) -> int:
        self.state = (_MUL * self.state + _INC) & _MASK
        return self.state >> 33

    def below(self, n: int) -> int:
        """Draw an integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        return self.next_u31() % n

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def uniform(self) -> float:
        """Float in [0, 1) with 31 bits of entropy."""
        return self.next_u31() / float(1 << 31)

"""Random streams.

All simulation code draws from numpy ``PCG64`` bit generators.  Replica ``i``
of an experiment with master seed ``s`` uses

    PCG64(SeedSequence(s, spawn_key=(i,)))

which is the same stream ``SeedSequence(s).spawn(n)[i]`` would give, but can
be built for any ``i`` without building the others.  Auxiliary streams
(shared pools, chain tests) use ``spawn_key=(AUX_KEY, k)``, which no
replica key can equal.
"""

import numpy as np


def replica_seed(master_seed, index):
    """Seed sequence of replica ``index`` under ``master_seed``."""
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))


def replica_stream(master_seed, index):
    """Bit generator for replica ``index``."""
    return np.random.PCG64(replica_seed(master_seed, index))


AUX_KEY = 2 ** 32


def aux_stream(master_seed, index=0):
    """Bit generator for auxiliary stream ``index`` under ``master_seed``."""
    return np.random.PCG64(np.random.SeedSequence(int(master_seed),
                                                  spawn_key=(AUX_KEY, int(index))))


def as_bitgen(rng):
    """Coerce ``rng`` to a PCG64-family bit generator.

    Accepts an int seed, a ``SeedSequence``, a ``Generator`` or a bit
    generator.  The generator must support ``advance`` (PCG64 and PCG64DXSM
    do), which the pure-Python kernel needs to return unused words.
    """
    if isinstance(rng, np.random.Generator):
        bg = rng.bit_generator
    elif isinstance(rng, np.random.BitGenerator):
        bg = rng
    elif rng is None or isinstance(rng, (int, np.integer, np.random.SeedSequence)):
        bg = np.random.PCG64(rng)
    else:
        raise TypeError("cannot build a random stream from %r" % type(rng).__name__)
    if not hasattr(bg, "advance"):
        raise TypeError("%s has no advance(); use PCG64" % type(bg).__name__)
    return bg

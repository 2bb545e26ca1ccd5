from typing import Tuple, Union

import numpy as np

StreamKey = Union[str, int, Tuple[Union[str, int], ...]]

_MASK64 = (1 << 64) - 1


def _encode_key(stream_key: StreamKey) -> Tuple[int, ...]:
    """
    Turns a stream key into a tuple of uint32 words. Every component is prefixed with its type tag and length so two
    different keys can never encode to the same words.
    """
    if not isinstance(stream_key, tuple):
        stream_key = (stream_key,)
    words = []
    for part in stream_key:
        if isinstance(part, (bool, np.bool_)):
            part = int(part)
        if isinstance(part, str):
            raw = part.encode('utf-8')
            words.extend((0, len(raw)))
            padded = raw + b'\x00' * (-len(raw) % 4)
            words.extend(int.from_bytes(padded[i:i + 4], 'little') for i in range(0, len(padded), 4))
        elif isinstance(part, (int, np.integer)):
            part = int(part)
            if part < 0:
                raise ValueError(f'stream key integers must be non-negative, got {part}')
            chunks = []
            while True:
                chunks.append(part & 0xFFFFFFFF)
                part >>= 32
                if part == 0:
                    break
            words.extend((1, len(chunks)))
            words.extend(chunks)
        else:
            raise TypeError(f'stream key parts must be str or int, got {type(part)}')
    return tuple(words)


class RngStream(object):
    """
    Counter based random stream (Philox) identified by (master_seed, run_index, stream_key). The same triple always
    yields the same draws, regardless of what other streams exist or in which order they were created. This is what
    makes parallel Monte Carlo reproducible.
    """

    def __init__(self, master_seed: int, run_index: int, stream_key: StreamKey):
        if run_index < 0:
            raise ValueError(f'run_index must be >= 0, got {run_index}')
        self.master_seed = int(master_seed) & _MASK64
        self.run_index = int(run_index)
        self.stream_key = stream_key
        seed_sequence = np.random.SeedSequence(entropy=self.master_seed,
                                               spawn_key=(self.run_index,) + _encode_key(stream_key))
        self.generator = np.random.Generator(np.random.Philox(seed_sequence))

    def __repr__(self):
        return f'RngStream(master_seed={self.master_seed}, run_index={self.run_index}, stream_key={self.stream_key!r})'

    def random(self, size=None):
        return self.generator.random(size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def multinomial(self, n, pvals, size=None):
        return self.generator.multinomial(n, pvals, size)

    def choice(self, a, size=None, replace=True, p=None):
        return self.generator.choice(a, size=size, replace=replace, p=p)


def rng_substream(master_seed: int, run_index: int, stream_key: StreamKey) -> RngStream:
    return RngStream(master_seed, run_index, stream_key)


def as_generator(rng: Union[RngStream, np.random.Generator]) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f'Expected RngStream or numpy Generator, got {type(rng)}')

import numpy as np

from depthbench import DepthMap


def random_map(rng, shape=(8, 8), low=1.0, high=80.0, holes=0.2):
    values = np.exp(rng.uniform(np.log(low), np.log(high), size=shape))
    valid = rng.random(shape) >= holes
    return DepthMap(np.where(valid, values, 0.0), valid)

"""
Feed-forward networks with hand-written reverse-mode gradients.

``MLP`` is a fixed topology (Linear -> ReLU -> ... -> Linear). ``forward``
returns the activations it needs for the backward pass instead of storing
them, so a network can be evaluated from several threads at once. Parameters
are exposed as a flat list ``[W0, b0, W1, b1, ...]`` shared by the optimizer,
the soft target update and the checkpoint writer.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..utils.errors import DomainError

Params = List[np.ndarray]


class MLP:
    """Multilayer perceptron with ReLU hidden layers and a linear output."""

    def __init__(
        self,
        sizes: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        zero_output: bool = False,
    ):
        """
        Initialize network.

        Args:
            sizes: Layer widths, input first and output last
            rng: Generator for the uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) init
            zero_output: Start the output layer at zero (outputs are 0 for any input)
        """
        if len(sizes) < 2:
            raise DomainError(f"an MLP needs at least input and output sizes, got {list(sizes)}")
        rng = rng or np.random.default_rng(0)
        self.sizes = [int(s) for s in sizes]
        self.params: Params = []
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            last = i == len(self.sizes) - 2
            if last and zero_output:
                weight = np.zeros((fan_in, fan_out))
                bias = np.zeros(fan_out)
            else:
                weight = rng.uniform(-bound, bound, size=(fan_in, fan_out))
                bias = rng.uniform(-bound, bound, size=fan_out)
            self.params.extend([weight, bias])

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """
        Evaluate the network.

        Args:
            x: Batch of inputs, shape (B, sizes[0])

        Returns:
            Tuple of (outputs, activations cache for ``backward``)
        """
        cache = [x]
        h = x
        for layer in range(self.n_layers):
            weight, bias = self.params[2 * layer], self.params[2 * layer + 1]
            z = h @ weight + bias
            if layer < self.n_layers - 1:
                cache.append(z)
                h = np.maximum(z, 0.0)
                cache.append(h)
            else:
                h = z
        return h, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache: List[np.ndarray], dout: np.ndarray) -> Tuple[Params, np.ndarray]:
        """
        Reverse-mode pass.

        Args:
            cache: Activations returned by ``forward``
            dout: Gradient of the loss w.r.t. the outputs

        Returns:
            Tuple of (parameter gradients aligned with ``params``, input gradient)
        """
        grads: Params = [np.empty(0)] * len(self.params)
        delta = dout
        for layer in reversed(range(self.n_layers)):
            weight = self.params[2 * layer]
            layer_input = cache[2 * layer]
            grads[2 * layer] = layer_input.T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
            delta = delta @ weight.T
            if layer > 0:
                pre_activation = cache[2 * layer - 1]
                delta = delta * (pre_activation > 0.0)
        return grads, delta

    def copy(self) -> "MLP":
        clone = MLP.__new__(MLP)
        clone.sizes = list(self.sizes)
        clone.params = [p.copy() for p in self.params]
        return clone

    def set_params(self, params: Params) -> None:
        """Overwrite parameters in place, so optimizers holding them stay valid."""
        _check_shapes(self.params, params)
        for target, source in zip(self.params, params):
            target[...] = source


def _check_shapes(reference: Params, other: Params) -> None:
    if len(reference) != len(other):
        raise DomainError(f"parameter count mismatch: {len(reference)} vs {len(other)}")
    for a, b in zip(reference, other):
        if np.shape(a) != np.shape(b):
            raise DomainError(f"parameter shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def soft_update(theta: Params, theta_bar: Params, tau: float) -> Params:
    """
    Polyak averaging of target parameters.

    Args:
        theta: Online parameters
        theta_bar: Target parameters
        tau: Update rate in [0, 1]

    Returns:
        New target parameters tau * theta + (1 - tau) * theta_bar
    """
    _check_shapes(theta, theta_bar)
    if not 0.0 <= tau <= 1.0:
        raise DomainError(f"tau must lie in [0, 1], got {tau}")
    return [tau * np.asarray(t) + (1.0 - tau) * np.asarray(tb) for t, tb in zip(theta, theta_bar)]


class Adam:
    """Adaptive moment estimation over a list of parameter arrays (updated in place)."""

    def __init__(self, params: Params, lr: float, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: Params) -> None:
        _check_shapes(self.params, grads)
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            p -= self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


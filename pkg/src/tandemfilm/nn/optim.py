"""Adam with bias correction.

Defaults lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8.  Frozen layers are
skipped entirely, so their parameters stay bit-identical no matter how many
steps run.
"""

import numpy as np


class Adam:
    def __init__(self, network, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.network = network
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}
        for i, name, value in network.named_params():
            self.m[i, name] = np.zeros_like(value)
            self.v[i, name] = np.zeros_like(value)

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**self.t
        bc2 = 1.0 - b2**self.t
        for i, layer in enumerate(self.network.layers):
            if layer.frozen:
                continue
            for name, grad in layer.grads.items():
                key = (i, name)
                self.m[key] = b1 * self.m[key] + (1.0 - b1) * grad
                self.v[key] = b2 * self.v[key] + (1.0 - b2) * grad * grad
                m_hat = self.m[key] / bc1
                v_hat = self.v[key] / bc2
                layer.params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

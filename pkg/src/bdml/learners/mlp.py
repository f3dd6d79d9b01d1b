"""One-hidden-layer ReLU network trained by full-batch gradient descent."""

import numpy as np

HIDDEN = 16
STEP = 1e-2
EPOCHS = 2000


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def init_params(p, hidden, rng):
    lim1 = 1.0 / np.sqrt(p)
    lim2 = 1.0 / np.sqrt(hidden)
    return {
        "W1": rng.uniform(-lim1, lim1, size=(p, hidden)),
        "b1": rng.uniform(-lim1, lim1, size=hidden),
        "W2": rng.uniform(-lim2, lim2, size=hidden),
        "b2": float(rng.uniform(-lim2, lim2)),
    }


def forward(params, x):
    pre = x @ params["W1"] + params["b1"]
    h = np.maximum(pre, 0.0)
    return pre, h, h @ params["W2"] + params["b2"]


def loss_and_grad(params, x, y, logistic):
    """Mean loss and its gradient.

    Squared error is halved; the logistic loss is the mean negative
    log-likelihood of the sigmoid output.
    """
    n = x.shape[0]
    pre, h, out = forward(params, x)
    if logistic:
        loss = float(np.mean(np.logaddexp(0.0, out) - y * out))
        g_out = (_expit(out) - y) / n
    else:
        err = out - y
        loss = 0.5 * float(np.mean(err * err))
        g_out = err / n
    g_h = np.outer(g_out, params["W2"]) * (pre > 0.0)
    grad = {
        "W1": x.T @ g_h,
        "b1": g_h.sum(axis=0),
        "W2": h.T @ g_out,
        "b2": float(g_out.sum()),
    }
    return loss, grad


class MLPModel:
    def __init__(self, params, x_center, x_scale, y_center, y_scale, logistic):
        self.params = params
        self.x_center = x_center
        self.x_scale = x_scale
        self.y_center = y_center
        self.y_scale = y_scale
        self.logistic = logistic

    def predict(self, x):
        _, _, out = forward(self.params, (x - self.x_center) / self.x_scale)
        if self.logistic:
            return _expit(out)
        return self.y_center + self.y_scale * out


def fit_mlp(x, y, spec):
    logistic = spec.task.value == "BinaryProbability"
    hidden = int(spec.hyper.get("hidden", HIDDEN))
    step = float(spec.hyper.get("step", STEP))
    epochs = int(spec.hyper.get("epochs", EPOCHS))
    rng = np.random.default_rng(spec.seed)

    x_center = x.mean(axis=0)
    x_scale = x.std(axis=0)
    x_scale[x_scale == 0.0] = 1.0
    xs = (x - x_center) / x_scale
    if logistic:
        y_center, y_scale, ys = 0.0, 1.0, y
    else:
        y_center, y_scale = float(y.mean()), float(y.std())
        ys = (y - y_center) / y_scale

    params = init_params(x.shape[1], hidden, rng)
    for _ in range(epochs):
        _, grad = loss_and_grad(params, xs, ys, logistic)
        for key in params:
            params[key] = params[key] - step * grad[key]
    return MLPModel(params, x_center, x_scale, y_center, y_scale, logistic)

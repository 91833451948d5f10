"""Test doubles shared across modules."""

import numpy as np

from driftcast.protocol import StreamCursor
from driftcast.series import ForecastVector


class RecordingCursor(StreamCursor):
    """Logs every read with the revealed count at the time of the read."""

    def __init__(self, series):
        super().__init__(series)
        self.reads: list[tuple[str, int, int]] = []  # (accessor, highest index read, revealed_count)

    def advance(self):
        value = super().advance()
        self.reads.append(("advance", self.revealed_count - 1, self.revealed_count))
        return value

    def revealed(self):
        out = super().revealed()
        self.reads.append(("revealed", len(out) - 1, self.revealed_count))
        return out

    def window(self, n):
        w = super().window(n)
        self.reads.append(("window", w.origin, self.revealed_count))
        return w

    @property
    def latest(self):
        value = StreamCursor.latest.fget(self)
        self.reads.append(("latest", self.revealed_count - 1, self.revealed_count))
        return value

    def violations(self):
        return [r for r in self.reads if r[1] >= r[2]]


class PerfectForecaster:
    """Forecasts the true future; evaluation of its run must be exactly zero."""

    model_id = "oracle"
    trainable = False

    def __init__(self, series, n, h):
        self._values = np.asarray(series.values, dtype=float)
        self.n, self.h = n, h

    def forecast(self, window):
        o = window.origin
        future = self._values[o + 1 : o + 1 + self.h]
        pad = np.full(self.h - future.size, future[-1] if future.size else self._values[-1])
        return ForecastVector(np.concatenate([future, pad]), origin=o)

    def update(self, window, targets, lr):
        return 0.0

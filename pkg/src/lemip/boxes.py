"""Correlators: indexed PR boxes, bulletin boards, shared tapes.

A PR box is a one-shot two-sided nonlocal box over a finite field: side B
receives a uniform x drawn before any input exists, and once both sides
have fed inputs a and b the side-A output u satisfies u - x = a*b (XOR
variants collapse to the same law in GF(2^k)).  Outputs are locally
uniform, so neither side's marginal depends on the other side's input.

The correlator programs speak the runtime's message effects and answer
queries from attached parties; a bulletin board is the signaling
correlator that makes the multi-verifier model collapse to the standard
single-verifier one.
"""

from __future__ import annotations

import random
from typing import Any, Iterator

from .fields import FieldSpec
from .runtime import Context, PartyId, RecvAny, Send

# shared_tape re-exported here per the module map; the implementation lives
# with the runtime because party contexts are built from it
from .runtime import shared_tape  # noqa: F401


class BoxError(Exception):
    """Double query on one side, or an unknown box index."""


class PRBoxInstance:
    """One-shot indexed PR box generalized over a field.

    x is drawn uniformly at creation, independent of everything side A
    does; side B gets x immediately on input, side A's output is defined
    once both inputs exist.  Each side may input at most once.
    """

    def __init__(self, index: int, spec: FieldSpec, rng: random.Random):
        self.index = index
        self.spec = spec
        self.x = rng.randrange(spec.order)  # side-B output, pre-drawn
        self.a: int | None = None
        self.b: int | None = None

    def query(self, side: str, value: int) -> int | None:
        """Feed one side; returns that side's output or None if deferred.

        Side B always gets x back at once.  Side A gets u = a*b + x when
        side B has already input; otherwise the input is recorded and the
        output must be collected with a_output() after B plays.
        """
        value = self.spec.canonical(value)
        if side == "B":
            if self.b is not None:
                raise BoxError(f"box {self.index}: side B already queried")
            self.b = value
            return self.x
        if side == "A":
            if self.a is not None:
                raise BoxError(f"box {self.index}: side A already queried")
            self.a = value
            return self.a_output()
        raise BoxError(f"unknown side {side!r}")

    def a_output(self) -> int | None:
        if self.a is None or self.b is None:
            return None
        return self.spec.add(self.spec.mul(self.a, self.b), self.x)


def pr_box_query(
    boxes: dict[int, PRBoxInstance],
    index: int,
    side: str,
    value: int,
    spec: FieldSpec,
    rng: random.Random,
) -> int | None:
    """Query an indexed box, creating it lazily on first touch."""
    box = boxes.get(index)
    if box is None:
        box = boxes[index] = PRBoxInstance(index, spec, rng)
    return box.query(side, value)


def pr_box_correlator(spec: FieldSpec):
    """Program for a correlator serving indexed PR boxes.

    Protocol of queries (payloads):
      ("box", index, "A"|"B", value)            -> ("box", index, output)
      ("boxes", "A"|"B", [(index, value), ...]) -> ("boxes", [outputs])
    Side-A queries made before side B are deferred and answered as soon as
    the matching side-B input arrives (delivery order follows the
    scheduler); x is drawn before side A's input exists, so the deferral
    cannot signal.
    """

    def program(ctx: Context) -> Iterator[Any]:
        boxes: dict[int, PRBoxInstance] = {}
        pending: list[tuple[PartyId, int]] = []  # deferred side-A replies
        while True:
            sender, payload = yield RecvAny()
            kind = payload[0]
            if kind == "box":
                _, index, side, value = payload
                out = pr_box_query(boxes, index, side, value, spec, ctx.rand)
                if side == "A" and out is None:
                    pending.append((sender, index))
                else:
                    yield Send(sender, ("box", index, out))
            elif kind == "boxes":
                _, side, queries = payload
                outs = []
                for index, value in queries:
                    out = pr_box_query(boxes, index, side, value, spec, ctx.rand)
                    if side == "A" and out is None:
                        raise BoxError(f"batch side-A query on unfed box {index}")
                    outs.append(out)
                yield Send(sender, ("boxes", outs))
            else:
                raise BoxError(f"unknown correlator query {payload!r}")
            # flush any deferred side-A outputs that became defined
            still = []
            for who, index in pending:
                out = boxes[index].a_output()
                if out is None:
                    still.append((who, index))
                else:
                    yield Send(who, ("box", index, out))
            pending = still

    return program


class BulletinBoard:
    """Append-only post list; reads never consume."""

    def __init__(self) -> None:
        self.posts: list[Any] = []

    def post(self, payload: Any) -> None:
        self.posts.append(payload)

    def read(self) -> list[Any]:
        return list(self.posts)


def bulletin_correlator():
    """Program for the signaling bulletin-board correlator.

    Queries:
      ("post", payload)      -> ("posted", count)
      ("read",)              -> ("posts", [...])
      ("read-wait", n)       -> ("posts", [...]) once at least n posts exist
    """

    def program(ctx: Context) -> Iterator[Any]:
        board = BulletinBoard()
        waiting: list[tuple[PartyId, int]] = []
        while True:
            sender, payload = yield RecvAny()
            kind = payload[0]
            if kind == "post":
                board.post(payload[1])
                yield Send(sender, ("posted", len(board.posts)))
            elif kind == "read":
                yield Send(sender, ("posts", board.read()))
            elif kind == "read-wait":
                waiting.append((sender, payload[1]))
            else:
                raise BoxError(f"unknown bulletin query {payload!r}")
            ready = [w for w in waiting if len(board.posts) >= w[1]]
            waiting = [w for w in waiting if len(board.posts) < w[1]]
            for who, _ in ready:
                yield Send(who, ("posts", board.read()))

    return program


def bulletin_post(board: BulletinBoard, payload: Any) -> None:
    board.post(payload)


def bulletin_read(board: BulletinBoard) -> list[Any]:
    return board.read()

"""Small builders shared by the test modules."""

from __future__ import annotations

from klsm.block import Block, Item


def items(*keys: int, taken: tuple[int, ...] = ()) -> list[Item]:
    out = [Item(k) for k in keys]
    for it in out:
        if it.key in taken:
            it.taken = True
    return out


def block(level: int, *keys: int, taken: tuple[int, ...] = (), bloom: int = 0) -> Block:
    return Block(level, items(*keys, taken=taken), bloom)


def live_keys(b: Block) -> list[int]:
    return [it.key for it in b.items[: b.filled] if not it.taken]

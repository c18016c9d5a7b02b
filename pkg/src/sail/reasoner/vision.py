"""Descriptions for elements that carry no text, cached by structural hash."""

from __future__ import annotations

import threading
from concurrent.futures import Future
from dataclasses import replace
from typing import Callable, Mapping, Protocol

from ..errors import ProviderUnavailable
from ..ui_model import UiElement, UiScreen, element_hash


class DescriptionProvider(Protocol):
    def __call__(self, element: UiElement) -> str: ...


class DescriptionCache:
    """Get-or-insert map keyed by element hash; one provider call per key.

    Concurrent callers asking for the same key wait on the first caller's
    result. A failed call leaves the key absent so a later call may retry.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, Future] = {}

    def __len__(self) -> int:
        with self._lock:
            return sum(1 for f in self._entries.values() if f.done() and not f.exception())

    def __contains__(self, key: str) -> bool:
        with self._lock:
            f = self._entries.get(key)
        return f is not None and f.done() and f.exception() is None

    def get_or_compute(self, key: str, compute: Callable[[], str]) -> str:
        with self._lock:
            fut = self._entries.get(key)
            owner = fut is None
            if owner:
                fut = self._entries[key] = Future()
        if not owner:
            return fut.result()
        try:
            value = compute()
        except BaseException as exc:
            with self._lock:
                del self._entries[key]
            fut.set_exception(exc)
            raise
        fut.set_result(value)
        return value


def describe_element_visual(e: UiElement, provider: DescriptionProvider,
                            cache: DescriptionCache) -> str:
    if e.has_description:
        raise ValueError("element already has text or a content description")

    def compute() -> str:
        try:
            return provider(e)
        except ProviderUnavailable:
            raise
        except Exception as exc:
            raise ProviderUnavailable(f"description provider failed: {exc}") from exc

    return cache.get_or_compute(element_hash(e), compute)


class FixtureProvider:
    """Table lookup from element hash to description; counts its calls."""

    def __init__(self, table: Mapping[str, str], default: str | None = None):
        self.table = dict(table)
        self.default = default
        self.calls: dict[str, int] = {}
        self._lock = threading.Lock()

    def __call__(self, element: UiElement) -> str:
        key = element_hash(element)
        with self._lock:
            self.calls[key] = self.calls.get(key, 0) + 1
        if key in self.table:
            return self.table[key]
        if self.default is not None:
            return self.default
        raise ProviderUnavailable(f"no fixture description for {key[:12]}")


def enrich_screen(screen: UiScreen, provider: DescriptionProvider,
                  cache: DescriptionCache) -> UiScreen:
    """Copy of ``screen`` where text-less interactable elements get a vision description."""

    def visit(el: UiElement, index: int) -> tuple[UiElement, int]:
        own = index
        index += 1
        kids = []
        for child in el.children:
            child, index = visit(child, index)
            kids.append(child)
        new = replace(el, children=tuple(kids)) if kids else el
        if (el.interactable and not el.has_description and not el.vision_desc
                and own not in screen.aggregates):
            new = replace(new, vision_desc=describe_element_visual(el, provider, cache))
        return new, index

    root, _ = visit(screen.root, 0)
    return UiScreen(screen.activity, root)

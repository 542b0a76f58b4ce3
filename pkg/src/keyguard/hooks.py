"""Method interception with before / replace / after hooks.

Modeled on the Xposed contract: a hook receives a ``HookParam`` holding the
mutable call arguments, the run context and (for after hooks) the result.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

from keyguard.errors import DuplicateHookId, RegistryBusy, ReplaceAlreadySet


class HookPoint(enum.Enum):
    ON_KEY = "OnKey"
    ON_UPDATE_SELECTION = "OnUpdateSelection"


class Phase(enum.Enum):
    BEFORE = "Before"
    AFTER = "After"
    REPLACE = "Replace"


@dataclass
class HookParam:
    args: Any
    context: Any = None
    result: Any = None


HookFn = Callable[[HookParam], Any]


@dataclass(frozen=True)
class HookRegistration:
    hook_id: str
    point: HookPoint
    phase: Phase
    fn: HookFn


@dataclass
class _PointHooks:
    before: list[HookRegistration] = field(default_factory=list)
    after: list[HookRegistration] = field(default_factory=list)
    replace: HookRegistration | None = None


class HookRegistry:
    def __init__(self):
        self._points = {point: _PointHooks() for point in HookPoint}
        self._ids: set[str] = set()
        self._in_flight = False

    def __len__(self):
        return len(self._ids)

    def register(self, registration: HookRegistration) -> None:
        if self._in_flight:
            raise RegistryBusy("cannot register hooks during a dispatch")
        if registration.hook_id in self._ids:
            raise DuplicateHookId(registration.hook_id)
        hooks = self._points[registration.point]
        if registration.phase is Phase.REPLACE:
            if hooks.replace is not None:
                raise ReplaceAlreadySet(
                    f"{registration.point.value} already replaced by {hooks.replace.hook_id!r}"
                )
            hooks.replace = registration
        elif registration.phase is Phase.BEFORE:
            hooks.before.append(registration)
        else:
            hooks.after.append(registration)
        self._ids.add(registration.hook_id)

    def hook(self, hook_id: str, point: HookPoint, phase: Phase) -> Callable[[HookFn], HookFn]:
        """Decorator form of :meth:`register`."""

        def decorator(fn: HookFn) -> HookFn:
            self.register(HookRegistration(hook_id, point, phase, fn))
            return fn

        return decorator

    def dispatch(self, point: HookPoint, args: Any, base: Callable[[Any], Any], context: Any = None) -> Any:
        """Run before hooks, then the replacement or ``base``, then after hooks.

        Any exception propagates immediately and skips the remaining hooks.
        The value returned is the base (or replacement) result; after hooks
        see it on ``param.result`` but rebinding it has no effect.
        """
        hooks = self._points[point]
        param = HookParam(args, context)
        self._in_flight = True
        try:
            for reg in hooks.before:
                reg.fn(param)
            if hooks.replace is not None:
                result = hooks.replace.fn(param)
            else:
                result = base(param.args)
            for reg in hooks.after:
                param.result = result
                reg.fn(param)
        finally:
            self._in_flight = False
        return result


def register_hook(registry: HookRegistry, registration: HookRegistration) -> None:
    registry.register(registration)


def dispatch(registry: HookRegistry, point: HookPoint, args: Any, base: Callable[[Any], Any], context: Any = None) -> Any:
    return registry.dispatch(point, args, base, context)

import copy

import pytest
from hypothesis import given
from hypothesis import strategies as st

from keyguard.errors import DuplicateHookId, RegistryBusy, ReplaceAlreadySet
from keyguard.hooks import HookPoint, HookRegistration, HookRegistry, Phase, dispatch, register_hook
from keyguard.inputs import KeyCode, KeyDispatch, KeyEvent


def make_args(ch="k"):
    return KeyDispatch.from_event(KeyEvent("pw", 0, KeyCode.of(ch)))


def test_before_hooks_run_in_registration_order():
    order = []
    reg = HookRegistry()
    register_hook(reg, HookRegistration("h1", HookPoint.ON_KEY, Phase.BEFORE, lambda p: order.append("h1")))
    register_hook(reg, HookRegistration("h2", HookPoint.ON_KEY, Phase.BEFORE, lambda p: order.append("h2")))
    dispatch(reg, HookPoint.ON_KEY, make_args(), lambda a: order.append("base"))
    assert order == ["h1", "h2", "base"]


def test_duplicate_id():
    reg = HookRegistry()
    reg.register(HookRegistration("kg", HookPoint.ON_KEY, Phase.BEFORE, lambda p: None))
    with pytest.raises(DuplicateHookId):
        reg.register(HookRegistration("kg", HookPoint.ON_UPDATE_SELECTION, Phase.AFTER, lambda p: None))


def test_second_replace_rejected():
    reg = HookRegistry()
    reg.register(HookRegistration("r1", HookPoint.ON_KEY, Phase.REPLACE, lambda p: None))
    with pytest.raises(ReplaceAlreadySet):
        reg.register(HookRegistration("r2", HookPoint.ON_KEY, Phase.REPLACE, lambda p: None))
    # a replace on the other point is fine
    reg.register(HookRegistration("r3", HookPoint.ON_UPDATE_SELECTION, Phase.REPLACE, lambda p: None))


def test_empty_registry_is_identity():
    args = make_args()
    before = copy.deepcopy(args)
    seen = []
    result = HookRegistry().dispatch(HookPoint.ON_KEY, args, lambda a: seen.append(a) or "res")
    assert result == "res"
    assert seen == [before] and args == before


def test_before_hook_rewrites_key():
    reg = HookRegistry()

    @reg.hook("enc", HookPoint.ON_KEY, Phase.BEFORE)
    def enc(param):
        param.args.rewrite(KeyCode.of("q"))

    seen = []
    reg.dispatch(HookPoint.ON_KEY, make_args("k"), lambda a: seen.append(a.primary_code))
    assert seen == [KeyCode.of("q")]


def test_replace_skips_base():
    reg = HookRegistry()
    reg.register(HookRegistration("r", HookPoint.ON_KEY, Phase.REPLACE, lambda p: "synthetic"))
    calls = []
    assert reg.dispatch(HookPoint.ON_KEY, make_args(), lambda a: calls.append(a)) == "synthetic"
    assert calls == []


def test_after_sees_result_but_cannot_change_it():
    reg = HookRegistry()
    seen = []

    def after(param):
        seen.append(param.result)
        param.result = "tampered"

    reg.register(HookRegistration("a", HookPoint.ON_KEY, Phase.AFTER, after))
    reg.register(HookRegistration("b", HookPoint.ON_KEY, Phase.AFTER, lambda p: seen.append(p.result)))
    assert reg.dispatch(HookPoint.ON_KEY, make_args(), lambda a: "base") == "base"
    assert seen == ["base", "base"]


def test_error_skips_remaining_hooks():
    reg = HookRegistry()
    ran = []

    def boom(param):
        raise RuntimeError("boom")

    reg.register(HookRegistration("b1", HookPoint.ON_KEY, Phase.BEFORE, boom))
    reg.register(HookRegistration("b2", HookPoint.ON_KEY, Phase.BEFORE, lambda p: ran.append("b2")))
    reg.register(HookRegistration("a1", HookPoint.ON_KEY, Phase.AFTER, lambda p: ran.append("a1")))
    with pytest.raises(RuntimeError):
        reg.dispatch(HookPoint.ON_KEY, make_args(), lambda a: ran.append("base"))
    assert ran == []
    # the registry is usable again afterwards
    reg.register(HookRegistration("late", HookPoint.ON_KEY, Phase.AFTER, lambda p: None))


def test_registration_during_dispatch_forbidden():
    reg = HookRegistry()

    def sneaky(param):
        reg.register(HookRegistration("x", HookPoint.ON_KEY, Phase.BEFORE, lambda p: None))

    reg.register(HookRegistration("s", HookPoint.ON_KEY, Phase.BEFORE, sneaky))
    with pytest.raises(RegistryBusy):
        reg.dispatch(HookPoint.ON_KEY, make_args(), lambda a: None)


def test_context_passed_through():
    reg = HookRegistry()
    got = []
    reg.register(HookRegistration("c", HookPoint.ON_UPDATE_SELECTION, Phase.AFTER, lambda p: got.append(p.context)))
    reg.dispatch(HookPoint.ON_UPDATE_SELECTION, None, lambda a: None, context="ctx")
    assert got == ["ctx"]


@given(st.lists(st.integers(1, 94), min_size=1, max_size=8))
def test_before_hooks_fold_left(shifts):
    reg = HookRegistry()
    for i, shift in enumerate(shifts):

        def hook(param, shift=shift):
            c = param.args.primary_code.code
            param.args.rewrite(KeyCode(32 + (c - 32 + shift) % 95))

        reg.register(HookRegistration(f"h{i}", HookPoint.ON_KEY, Phase.BEFORE, hook))
    seen = []
    reg.dispatch(HookPoint.ON_KEY, make_args("a"), lambda a: seen.append(a.primary_code.code))
    assert seen == [32 + (ord("a") - 32 + sum(shifts)) % 95]


@pytest.mark.parametrize("n_before,n_after,replace", [(0, 0, False), (2, 1, False), (1, 3, True)])
def test_execution_counts(n_before, n_after, replace):
    reg = HookRegistry()
    counts = {"hooks": 0, "base": 0}

    def count(param):
        counts["hooks"] += 1

    for i in range(n_before):
        reg.register(HookRegistration(f"b{i}", HookPoint.ON_KEY, Phase.BEFORE, count))
    for i in range(n_after):
        reg.register(HookRegistration(f"a{i}", HookPoint.ON_KEY, Phase.AFTER, count))
    if replace:
        reg.register(HookRegistration("r", HookPoint.ON_KEY, Phase.REPLACE, count))
    reg.dispatch(HookPoint.ON_KEY, make_args(), lambda a: counts.__setitem__("base", counts["base"] + 1))
    assert counts["hooks"] + counts["base"] == n_before + 1 + n_after
    assert counts["base"] == (0 if replace else 1)

"""Simulator for selective keystroke encryption against keylogging IMEs."""

from keyguard.adversary import (
    AdversaryWorld,
    CapturedData,
    Channel,
    ColludingApp,
    ExfilServer,
    ImeKind,
    KeyloggerIme,
    SharedFileStore,
    adversary_collect,
)
from keyguard.analysis import (
    GroundTruth,
    LatencyStats,
    LeakageReport,
    PassthroughDiff,
    compare_passthrough,
    compute_leakage,
    run_latency_bench,
)
from keyguard.cipher import Direction, Rc4, rc4_keystream, ring_map
from keyguard.defense import (
    Batching,
    CipherSession,
    KeyGuard,
    KeyGuardConfig,
    Reason,
    SensitivityDecision,
    classify,
    mark_field,
)
from keyguard.hooks import HookParam, HookPoint, HookRegistration, HookRegistry, Phase
from keyguard.inputs import (
    EditorState,
    FieldContext,
    InputClass,
    KeyCode,
    KeyDispatch,
    KeyEvent,
    KeyboardLayout,
    SelectionUpdate,
    touch_to_keycode,
)
from keyguard.rules import Rule, RuleMatcher
from keyguard.scenario import Scenario, load_scenario, parse_scenario
from keyguard.simulation import RunArtifacts, Simulation, run

__version__ = "0.1.0"

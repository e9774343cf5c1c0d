"""Kernel state machine: lifecycle, ceremonies, queue, sensor gating."""

import pytest

from tcbsim.errors import NotInSecureMode, QueueFull, UnknownSensor
from tcbsim.kernel import (
    ApiRequest,
    CAUSE_EXIT_BUTTON,
    CAUSE_IDLE_TIMEOUT,
    DELIVER,
    DROP,
    KIND_ENABLE_SENSOR,
    KIND_REQUEST_DATA,
    KernelConfig,
    KernelCore,
    LED_OFF,
    LED_ON,
    MENU_BUILTINS,
    MODE_NORMAL,
    MODE_SECURE,
    SENSOR_BLOCKED,
    SENSOR_DISCARDING,
    SENSOR_OPEN,
    SENSOR_TEMP_ENABLED,
    US_PER_MINUTE,
)
from tcbsim.rng import DeterministicRng


class RecordingBus:
    def __init__(self):
        self.events = []
        self.charges = []
        self.led = []
        self.touch = []

    def charge(self, what):
        self.charges.append(what)

    def led_changed(self, on):
        self.led.append(on)

    def touch_claimed(self):
        self.touch.append("claimed")

    def touch_released(self):
        self.touch.append("released")

    def trace(self, event, fields):
        self.events.append((event, fields))

    def names(self):
        return [e for e, _ in self.events]


def make_kernel(suppression=0.0, training_entries=50, seed=0, **kw):
    bus = RecordingBus()
    config = KernelConfig(suppression_prob=suppression,
                          training_entries=training_entries, **kw)
    return KernelCore(config, DeterministicRng(seed, "training"), bus), bus


def enter(kernel, now=0):
    kernel.sak_press(now)
    assert kernel.mode == MODE_SECURE


def test_press_enters_secure_led_on():
    kernel, bus = make_kernel()
    kernel.sak_press(0)
    assert kernel.mode == MODE_SECURE
    assert kernel.led == LED_ON
    assert bus.touch == ["claimed"]
    assert "world_switch" in bus.charges and "sak_handling" in bus.charges


def test_press_with_suppression_draw():
    # prob 1.0 forces the suppression branch deterministically
    kernel, bus = make_kernel(suppression=1.0)
    kernel.sak_press(0)
    assert kernel.mode == MODE_SECURE
    assert kernel.led == LED_OFF
    assert kernel.suppressed_count == 1
    assert ("sak_press", {"entry": 1, "suppressed": True}) in bus.events


def test_re_press_during_suppression():
    kernel, bus = make_kernel(suppression=1.0)
    kernel.sak_press(0)
    kernel.sak_press(1)
    assert kernel.led == LED_ON
    assert kernel.repress_count == 1
    assert "sak_re_press" in bus.names()
    assert kernel.feedback_count == 0
    # action after the re-press executes
    assert kernel.user_action(2, "sign") is True


def test_suppressed_action_gets_negative_feedback():
    kernel, bus = make_kernel(suppression=1.0)
    kernel.sak_press(0)
    executed = kernel.user_action(1, "sign")
    assert executed is False
    assert kernel.feedback_count == 1
    assert "led_blink" in bus.names() and "user_notice" in bus.names()


def test_normal_session_actions_execute():
    kernel, _ = make_kernel()
    kernel.sak_press(0)
    assert kernel.user_action(1, "anything") is True


def test_action_outside_secure_mode_raises():
    kernel, _ = make_kernel()
    with pytest.raises(NotInSecureMode):
        kernel.user_action(0, "x")


def test_exit_button():
    kernel, bus = make_kernel()
    kernel.sak_press(0)
    kernel.exit_secure(1, CAUSE_EXIT_BUTTON)
    assert kernel.mode == MODE_NORMAL
    assert kernel.led == LED_OFF
    assert bus.touch == ["claimed", "released"]
    with pytest.raises(NotInSecureMode):
        kernel.exit_secure(2, CAUSE_EXIT_BUTTON)


def test_idle_timeout_auto_exit():
    kernel, bus = make_kernel()
    kernel.sak_press(0)
    kernel.tick(5 * US_PER_MINUTE - 1)
    assert kernel.mode == MODE_SECURE
    kernel.tick(5 * US_PER_MINUTE)
    assert kernel.mode == MODE_NORMAL
    assert kernel.last_exit_cause == CAUSE_IDLE_TIMEOUT
    assert ("exit_secure", {"cause": "idle_timeout"}) in bus.events


def test_user_action_refreshes_idle_deadline():
    kernel, _ = make_kernel()
    kernel.sak_press(0)
    kernel.user_action(4 * US_PER_MINUTE, "browse")
    kernel.tick(8 * US_PER_MINUTE)
    assert kernel.mode == MODE_SECURE
    kernel.tick(9 * US_PER_MINUTE + 1)
    assert kernel.mode == MODE_NORMAL


def test_queue_fifo_per_app_and_menu_labels():
    kernel, _ = make_kernel()
    r1 = ApiRequest(KIND_REQUEST_DATA, "bob", ("friends",), None, "app1")
    r2 = ApiRequest(KIND_REQUEST_DATA, "carol", ("work",), None, "app2")
    r3 = ApiRequest(KIND_REQUEST_DATA, "dave", ("friends",), None, "app1")
    ids = [kernel.enqueue_request(r, 0) for r in (r1, r2, r3)]
    assert ids == sorted(ids)
    kernel.sak_press(1)
    menu = kernel.menu()
    assert menu.builtins == MENU_BUILTINS
    assert [m[2] for m in menu.requests] == ["bob", "carol", "dave"]
    assert menu.requests[0][3] == ("friends",)
    app1 = [m for m in menu.requests if m[2] in ("bob", "dave")]
    assert [m[2] for m in app1] == ["bob", "dave"]  # FIFO per app


def test_menu_requires_secure_mode():
    kernel, _ = make_kernel()
    with pytest.raises(NotInSecureMode):
        kernel.menu()


def test_queue_capacity_33rd_rejected():
    kernel, _ = make_kernel()
    for i in range(32):
        kernel.enqueue_request(
            ApiRequest(KIND_REQUEST_DATA, f"p{i}", (), None, "app"), 0)
    with pytest.raises(QueueFull):
        kernel.enqueue_request(
            ApiRequest(KIND_REQUEST_DATA, "p32", (), None, "app"), 0)


def test_enable_sensor_requests_coalesce():
    kernel, _ = make_kernel()
    a = ApiRequest(KIND_ENABLE_SENSOR, "", (), "mic", "app", coalesce_key="mic")
    b = ApiRequest(KIND_ENABLE_SENSOR, "", (), "mic", "app", coalesce_key="mic")
    c = ApiRequest(KIND_ENABLE_SENSOR, "", (), "mic", "other", coalesce_key="mic")
    id_a = kernel.enqueue_request(a, 0)
    id_b = kernel.enqueue_request(b, 0)
    id_c = kernel.enqueue_request(c, 0)
    assert id_a == id_b
    assert id_c != id_a
    assert len(kernel.pending) == 2


def test_take_request():
    kernel, _ = make_kernel()
    rid = kernel.enqueue_request(
        ApiRequest(KIND_REQUEST_DATA, "bob", (), None, "app"), 0)
    req = kernel.take_request(rid)
    assert req.request_id == rid
    assert kernel.take_request(rid) is None


def test_sensor_gate_blocked_and_open():
    kernel, _ = make_kernel()
    kernel.sak_press(0)
    kernel.sensor_set(0, "mic", SENSOR_BLOCKED)
    assert kernel.sensor_gate(1, "mic") == DROP
    assert kernel.sensor_gate(1, "gps") == DELIVER  # default open
    with pytest.raises(UnknownSensor):
        kernel.sensor_gate(1, "sonar")


def test_sensor_temp_enable_expiry():
    kernel, _ = make_kernel()
    hour = 60 * US_PER_MINUTE
    kernel.sak_press(0)
    kernel.sensor_set(0, "mic", SENSOR_TEMP_ENABLED, until=hour)
    assert kernel.sensor_gate(59 * US_PER_MINUTE, "mic") == DELIVER
    assert kernel.sensor_gate(61 * US_PER_MINUTE, "mic") == DROP
    # auto-revert happened
    assert kernel.sensor_policy("mic") == (SENSOR_BLOCKED, 0)


def test_sensor_discarding_drops_signals():
    kernel, _ = make_kernel()
    kernel.sak_press(0)
    kernel.sensor_set(0, "camera", SENSOR_DISCARDING, until=10 * US_PER_MINUTE)
    assert kernel.sensor_gate(1, "camera") == DROP


def test_sensor_set_requires_secure_mode():
    kernel, _ = make_kernel()
    with pytest.raises(NotInSecureMode):
        kernel.sensor_set(0, "mic", SENSOR_BLOCKED)


def test_suppression_set_is_pure_function_of_seed():
    def suppressed_set(seed):
        kernel, _ = make_kernel(suppression=0.3, training_entries=1000,
                                seed=seed)
        out = []
        t = 0
        for i in range(300):
            kernel.sak_press(t)
            if kernel.session.suppressed:
                out.append(i)
            kernel.exit_secure(t + 1, CAUSE_EXIT_BUTTON)
            t += 10
        return out

    a, b, c = suppressed_set(7), suppressed_set(7), suppressed_set(8)
    assert a == b
    assert a != c
    assert len(a) > 0


def test_suppression_stops_after_training_period():
    kernel, _ = make_kernel(suppression=1.0, training_entries=3)
    t = 0
    for i in range(5):
        kernel.sak_press(t)
        suppressed = kernel.session.suppressed
        assert suppressed == (i < 3)
        kernel.exit_secure(t + 1, CAUSE_EXIT_BUTTON)
        t += 10


def test_session_destroys_handle_on_exit():
    class Handle:
        invalidated = False

        def invalidate(self):
            self.invalidated = True

    kernel, _ = make_kernel()
    kernel.sak_press(0)
    h = Handle()
    kernel.session.handle = h
    kernel.exit_secure(1, CAUSE_EXIT_BUTTON)
    assert h.invalidated


def test_clone_is_independent():
    kernel, _ = make_kernel(suppression=0.5, training_entries=100)
    kernel.sak_press(0)
    c = kernel.clone()
    kernel.exit_secure(1, CAUSE_EXIT_BUTTON)
    assert c.mode == MODE_SECURE
    assert kernel.mode == MODE_NORMAL

"""The trusted-core state machine.

Owns the secure-mode lifecycle, the LED indicator, the training and
forcing ceremonies, the pending-request queue, and sensor gating policy.
Side effects (LED wires, touch routing, cycle charges, trace records) go
through a bus object supplied by the device model, so the same state
machine runs under the full simulator, under unit tests, and under the
exhaustive model checker.

This module is deliberately written in a conservative Python subset: the
build compiles it with Cython into tcbsim.kernel._core and the package
selects the compiled twin at import time (see __init__.py). The model
checker pushes millions of events through step functions here, which is
the simulator's hot loop. Import the public names from tcbsim.kernel,
never from this module directly, so only one twin is ever active.
"""

from tcbsim.errors import NotInSecureMode, QueueFull, UnknownSensor

try:
    import cython
    COMPILED = cython.compiled
except ImportError:  # pragma: no cover
    COMPILED = False

# modes / LED
MODE_NORMAL = 0
MODE_SECURE = 1
LED_OFF = 0
LED_ON = 1

# exit causes; lockout is reachable only from the credential path on the
# secure UI, never from a normal-world event
CAUSE_EXIT_BUTTON = 1
CAUSE_IDLE_TIMEOUT = 2
CAUSE_LOCKOUT = 3

EXIT_CAUSE_NAMES = {CAUSE_EXIT_BUTTON: "exit_button",
                    CAUSE_IDLE_TIMEOUT: "idle_timeout",
                    CAUSE_LOCKOUT: "credential_lockout"}

# sensor policy kinds
SENSOR_OPEN = 0
SENSOR_BLOCKED = 1
SENSOR_TEMP_ENABLED = 2
SENSOR_DISCARDING = 3

SENSOR_KIND_NAMES = {SENSOR_OPEN: "open", SENSOR_BLOCKED: "blocked",
                     SENSOR_TEMP_ENABLED: "temp_enabled",
                     SENSOR_DISCARDING: "discarding"}

# gate decisions
DELIVER = 0
DROP = 1

# request kinds (the five application API functions)
KIND_REQUEST_DATA = "request_data"
KIND_DISPLAY_MESSAGE = "display_message"
KIND_REQUEST_SIGNATURE = "request_signature"
KIND_DISPLAY_SIGNED_DOC = "display_signed_doc"
KIND_ENABLE_SENSOR = "enable_sensor"

MENU_BUILTINS = ("repository", "sensors", "archive", "peer_admin", "exit")

US_PER_MINUTE = 60 * 1000 * 1000

# model-checker event alphabet: every externally reachable entry point
EV_SAK = 0
EV_EXIT_BUTTON = 1
EV_USER_ACTION = 2
EV_APP_ENQUEUE = 3
EV_TOUCH = 4
EV_SENSOR_SIGNAL = 5
EV_SENSOR_SET = 6
EV_TICK_SHORT = 7
EV_TICK_LONG = 8

EVENT_ALPHABET = (EV_SAK, EV_EXIT_BUTTON, EV_USER_ACTION, EV_APP_ENQUEUE,
                  EV_TOUCH, EV_SENSOR_SIGNAL, EV_SENSOR_SET, EV_TICK_SHORT,
                  EV_TICK_LONG)

EVENT_NAMES = ("sak", "exit_button", "user_action", "app_enqueue", "touch",
               "sensor_signal", "sensor_set", "tick_short", "tick_long")


class NullBus:
    """No-op side-effect sink; used by tests and the model checker."""

    def charge(self, what):
        pass

    def led_changed(self, on):
        pass

    def touch_claimed(self):
        pass

    def touch_released(self):
        pass

    def trace(self, event, fields):
        pass


NULL_BUS = NullBus()


class KernelConfig:
    __slots__ = ("idle_timeout_us", "suppression_prob", "training_entries",
                 "queue_capacity", "reblock_grace_us", "temp_enable_max_us",
                 "sensors", "credential_attempts")

    def __init__(self, idle_timeout_us=5 * US_PER_MINUTE,
                 suppression_prob=0.1, training_entries=50,
                 queue_capacity=32, reblock_grace_us=60 * 1000 * 1000,
                 temp_enable_max_us=60 * US_PER_MINUTE,
                 sensors=("mic", "camera", "gps"),
                 credential_attempts=3):
        self.idle_timeout_us = idle_timeout_us
        self.suppression_prob = suppression_prob
        self.training_entries = training_entries
        self.queue_capacity = queue_capacity
        self.reblock_grace_us = reblock_grace_us
        self.temp_enable_max_us = temp_enable_max_us
        self.sensors = tuple(sensors)
        self.credential_attempts = credential_attempts


class ApiRequest:
    __slots__ = ("request_id", "kind", "peer_name", "peer_groups", "payload",
                 "origin_app_id", "coalesce_key", "enqueued_at")

    def __init__(self, kind, peer_name, peer_groups, payload, origin_app_id,
                 coalesce_key="", enqueued_at=0):
        self.request_id = -1  # assigned by the kernel on enqueue
        self.kind = kind
        self.peer_name = peer_name
        self.peer_groups = tuple(peer_groups)
        self.payload = payload
        self.origin_app_id = origin_app_id
        self.coalesce_key = coalesce_key
        self.enqueued_at = enqueued_at


class SecureSession:
    __slots__ = ("entered_at", "suppressed", "re_pressed", "handle",
                 "bad_credentials", "feedback_given")

    def __init__(self, entered_at, suppressed):
        self.entered_at = entered_at
        self.suppressed = suppressed
        self.re_pressed = False
        self.handle = None       # unlocked key handle, owned until exit
        self.bad_credentials = 0
        self.feedback_given = 0

    def destroy(self):
        if self.handle is not None:
            self.handle.invalidate()
            self.handle = None


class MenuModel:
    """Data-only menu: built-in services followed by pending requests,
    each labeled with the requesting peer's name and groups."""

    __slots__ = ("builtins", "requests")

    def __init__(self, builtins, requests):
        self.builtins = builtins
        self.requests = requests


class KernelCore:
    __slots__ = ("config", "bus", "rng", "mode", "led", "idle_deadline",
                 "session", "pending", "policies", "entry_count",
                 "suppressed_count", "repress_count", "feedback_count",
                 "last_exit_cause", "_next_request_id")

    def __init__(self, config, rng, bus=None):
        self.config = config
        self.bus = bus if bus is not None else NULL_BUS
        self.rng = rng
        self.mode = MODE_NORMAL
        self.led = LED_OFF
        self.idle_deadline = 0
        self.session = None
        self.pending = []
        self.policies = {}
        for s in config.sensors:
            self.policies[s] = (SENSOR_OPEN, 0)
        self.entry_count = 0
        self.suppressed_count = 0
        self.repress_count = 0
        self.feedback_count = 0
        self.last_exit_cause = 0
        self._next_request_id = 1

    # ---- secure-mode lifecycle ----

    def sak_press(self, now):
        """Handle the secure attention key.

        Never fails and is never maskable: nothing here conditions on any
        normal-world state. Pressing in secure-mode re-asserts it (and
        ends a training suppression episode)."""
        self.bus.charge("sak_handling")
        if self.mode == MODE_NORMAL:
            self.bus.charge("world_switch")
            self.mode = MODE_SECURE
            self.entry_count += 1
            suppressed = False
            if (self.config.suppression_prob > 0.0
                    and self.entry_count <= self.config.training_entries
                    and self.rng.random() < self.config.suppression_prob):
                suppressed = True
            self.session = SecureSession(now, suppressed)
            self.idle_deadline = now + self.config.idle_timeout_us
            # the semantic record goes first; side-effect records follow
            self.bus.trace("sak_press", {"entry": self.entry_count,
                                         "suppressed": suppressed})
            self.bus.touch_claimed()
            if suppressed:
                self.suppressed_count += 1
                self.led = LED_OFF
            else:
                self.led = LED_ON
                self.bus.led_changed(True)
        else:
            self.idle_deadline = now + self.config.idle_timeout_us
            session = self.session
            if session.suppressed and not session.re_pressed:
                session.re_pressed = True
                self.repress_count += 1
                self.bus.trace("sak_re_press", {"entry": self.entry_count})
                self.led = LED_ON
                self.bus.led_changed(True)
            else:
                self.bus.trace("sak_press_secure", {"entry": self.entry_count})

    def user_action(self, now, action):
        """Ceremony gate for any user action inside secure-mode.

        Returns True when the action may execute. During an unacknowledged
        suppression episode the action is withheld and negative feedback
        (LED blink + notice) is emitted instead."""
        if self.mode != MODE_SECURE:
            raise NotInSecureMode(action)
        self.idle_deadline = now + self.config.idle_timeout_us
        session = self.session
        if session.suppressed and not session.re_pressed:
            session.feedback_given += 1
            self.feedback_count += 1
            self.bus.trace("led_blink", {"reason": "training"})
            self.bus.trace("user_notice",
                           {"notice": "indicator_check", "action": action})
            return False
        self.bus.trace("user_action", {"action": action})
        return True

    def exit_secure(self, now, cause):
        if self.mode != MODE_SECURE:
            raise NotInSecureMode("exit_secure")
        self.mode = MODE_NORMAL
        self.led = LED_OFF
        self.session.destroy()
        self.session = None
        self.last_exit_cause = cause
        self.bus.trace("exit_secure", {"cause": EXIT_CAUSE_NAMES[cause]})
        self.bus.led_changed(False)
        self.bus.touch_released()
        self.bus.charge("world_switch")

    def tick(self, now):
        """Timer entry point: idle timeout and sensor-policy expiry."""
        if self.mode == MODE_SECURE and now >= self.idle_deadline:
            self.exit_secure(now, CAUSE_IDLE_TIMEOUT)
        for sensor in self.config.sensors:
            kind, until = self.policies[sensor]
            if kind == SENSOR_TEMP_ENABLED and now >= until:
                self.policies[sensor] = (SENSOR_BLOCKED, 0)
                self.bus.trace("sensor_reblocked", {"sensor": sensor})
            elif kind == SENSOR_DISCARDING and now >= until:
                self.policies[sensor] = (SENSOR_BLOCKED, 0)
                self.bus.trace("sensor_discard_expired", {"sensor": sensor})

    # ---- pending-request queue ----

    def enqueue_request(self, request, now):
        """Queue an application request for user approval.

        Callable from normal mode (apps queue while the user is
        elsewhere). Duplicate enable-sensor requests for the same sensor
        from the same app coalesce onto the existing entry."""
        if request.coalesce_key:
            for r in self.pending:
                if (r.origin_app_id == request.origin_app_id
                        and r.coalesce_key == request.coalesce_key):
                    self.bus.trace("request_coalesced",
                                   {"request_id": r.request_id,
                                    "app": request.origin_app_id})
                    return r.request_id
        if len(self.pending) >= self.config.queue_capacity:
            raise QueueFull(str(self.config.queue_capacity))
        request.request_id = self._next_request_id
        self._next_request_id += 1
        request.enqueued_at = now
        self.pending.append(request)
        self.bus.trace("request_enqueued",
                       {"request_id": request.request_id,
                        "kind": request.kind, "peer": request.peer_name,
                        "app": request.origin_app_id})
        return request.request_id

    def take_request(self, request_id):
        """Remove and return a pending request (None if absent)."""
        for i in range(len(self.pending)):
            if self.pending[i].request_id == request_id:
                return self.pending.pop(i)
        return None

    def peek_request(self, request_id):
        for r in self.pending:
            if r.request_id == request_id:
                return r
        return None

    def menu(self):
        if self.mode != MODE_SECURE:
            raise NotInSecureMode("present_menu")
        entries = []
        for r in self.pending:
            entries.append((r.request_id, r.kind, r.peer_name, r.peer_groups))
        return MenuModel(MENU_BUILTINS, tuple(entries))

    # ---- sensor gating ----

    def sensor_set(self, now, sensor, kind, until=0):
        """Set a sensor policy from the secure-mode UI."""
        if self.mode != MODE_SECURE:
            raise NotInSecureMode("sensor_set")
        if sensor not in self.policies:
            raise UnknownSensor(sensor)
        self.policies[sensor] = (kind, until)
        self.bus.trace("sensor_policy",
                       {"sensor": sensor, "policy": SENSOR_KIND_NAMES[kind],
                        "until": until})

    def sensor_gate(self, now, sensor):
        """Decide delivery of one sensor signal. Expired temporary grants
        auto-revert to blocked."""
        if sensor not in self.policies:
            raise UnknownSensor(sensor)
        kind, until = self.policies[sensor]
        if kind == SENSOR_TEMP_ENABLED:
            if now < until:
                return DELIVER
            self.policies[sensor] = (SENSOR_BLOCKED, 0)
            self.bus.trace("sensor_reblocked", {"sensor": sensor})
            return DROP
        if kind == SENSOR_OPEN:
            return DELIVER
        return DROP

    def sensor_policy(self, sensor):
        if sensor not in self.policies:
            raise UnknownSensor(sensor)
        return self.policies[sensor]

    # ---- model-checker support ----

    def clone(self):
        c = KernelCore.__new__(KernelCore)
        c.config = self.config
        c.bus = self.bus
        c.rng = self.rng.clone()
        c.mode = self.mode
        c.led = self.led
        c.idle_deadline = self.idle_deadline
        if self.session is None:
            c.session = None
        else:
            s = SecureSession(self.session.entered_at, self.session.suppressed)
            s.re_pressed = self.session.re_pressed
            s.bad_credentials = self.session.bad_credentials
            s.feedback_given = self.session.feedback_given
            c.session = s
        c.pending = list(self.pending)
        c.policies = dict(self.policies)
        c.entry_count = self.entry_count
        c.suppressed_count = self.suppressed_count
        c.repress_count = self.repress_count
        c.feedback_count = self.feedback_count
        c.last_exit_cause = self.last_exit_cause
        c._next_request_id = self._next_request_id
        return c

    def handle(self, code, now):
        """Dispatch one alphabet event; thin adapter over the real entry
        points so the model checker exercises production paths only."""
        if code == EV_SAK:
            self.sak_press(now)
        elif code == EV_EXIT_BUTTON:
            if self.mode == MODE_SECURE:
                self.exit_secure(now, CAUSE_EXIT_BUTTON)
        elif code == EV_USER_ACTION:
            if self.mode == MODE_SECURE:
                self.user_action(now, "generic")
        elif code == EV_APP_ENQUEUE:
            try:
                self.enqueue_request(
                    ApiRequest(KIND_REQUEST_DATA, "peer", (), None, "app"),
                    now)
            except QueueFull:
                pass
        elif code == EV_TOUCH:
            pass  # routing is the device's job; no kernel state involved
        elif code == EV_SENSOR_SIGNAL:
            self.sensor_gate(now, self.config.sensors[0])
        elif code == EV_SENSOR_SET:
            try:
                self.sensor_set(now, self.config.sensors[0], SENSOR_BLOCKED)
            except NotInSecureMode:
                pass
        else:  # EV_TICK_SHORT / EV_TICK_LONG: caller advanced `now`
            self.tick(now)

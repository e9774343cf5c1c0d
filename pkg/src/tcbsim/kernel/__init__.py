"""Kernel state machine with a compiled fast path.

The build cythonizes core.py into tcbsim.kernel._core; when that
extension imports (and really is compiled, not a stray source copy),
its names are re-exported here, otherwise the interpreted module is.
Everything else in the package imports kernel names from here so exactly
one twin is active per process.
"""

from tcbsim.kernel import core as _py_core

_impl = _py_core
try:
    from tcbsim.kernel import _core as _ext_core
    if getattr(_ext_core, "COMPILED", False):
        _impl = _ext_core
except ImportError:
    pass

ACTIVE_IMPLEMENTATION = "compiled" if _impl is not _py_core else "python"

KernelConfig = _impl.KernelConfig
KernelCore = _impl.KernelCore
ApiRequest = _impl.ApiRequest
SecureSession = _impl.SecureSession
MenuModel = _impl.MenuModel
NullBus = _impl.NullBus

MODE_NORMAL = _impl.MODE_NORMAL
MODE_SECURE = _impl.MODE_SECURE
LED_OFF = _impl.LED_OFF
LED_ON = _impl.LED_ON
CAUSE_EXIT_BUTTON = _impl.CAUSE_EXIT_BUTTON
CAUSE_IDLE_TIMEOUT = _impl.CAUSE_IDLE_TIMEOUT
CAUSE_LOCKOUT = _impl.CAUSE_LOCKOUT
EXIT_CAUSE_NAMES = _impl.EXIT_CAUSE_NAMES
SENSOR_OPEN = _impl.SENSOR_OPEN
SENSOR_BLOCKED = _impl.SENSOR_BLOCKED
SENSOR_TEMP_ENABLED = _impl.SENSOR_TEMP_ENABLED
SENSOR_DISCARDING = _impl.SENSOR_DISCARDING
SENSOR_KIND_NAMES = _impl.SENSOR_KIND_NAMES
DELIVER = _impl.DELIVER
DROP = _impl.DROP
KIND_REQUEST_DATA = _impl.KIND_REQUEST_DATA
KIND_DISPLAY_MESSAGE = _impl.KIND_DISPLAY_MESSAGE
KIND_REQUEST_SIGNATURE = _impl.KIND_REQUEST_SIGNATURE
KIND_DISPLAY_SIGNED_DOC = _impl.KIND_DISPLAY_SIGNED_DOC
KIND_ENABLE_SENSOR = _impl.KIND_ENABLE_SENSOR
MENU_BUILTINS = _impl.MENU_BUILTINS
US_PER_MINUTE = _impl.US_PER_MINUTE
EV_SAK = _impl.EV_SAK
EV_EXIT_BUTTON = _impl.EV_EXIT_BUTTON
EV_USER_ACTION = _impl.EV_USER_ACTION
EV_APP_ENQUEUE = _impl.EV_APP_ENQUEUE
EV_TOUCH = _impl.EV_TOUCH
EV_SENSOR_SIGNAL = _impl.EV_SENSOR_SIGNAL
EV_SENSOR_SET = _impl.EV_SENSOR_SET
EV_TICK_SHORT = _impl.EV_TICK_SHORT
EV_TICK_LONG = _impl.EV_TICK_LONG
EVENT_ALPHABET = _impl.EVENT_ALPHABET
EVENT_NAMES = _impl.EVENT_NAMES

"""Deterministic two-world device model: event loop, interrupts,
peripherals, cycle ledger, taint audit."""

from tcbsim.sim.device import Device, DeviceIdentity
from tcbsim.sim.interrupts import InterruptRouter, MASKED, NWORLD, SWORLD
from tcbsim.sim.ledger import CYCLES_PER_SECOND, CYCLES_PER_US, CycleLedger
from tcbsim.sim.loop import EventLoop
from tcbsim.sim.storage import SecureStorage
from tcbsim.sim.trace import TraceLog

__all__ = [
    "CYCLES_PER_SECOND", "CYCLES_PER_US", "CycleLedger", "Device",
    "DeviceIdentity", "EventLoop", "InterruptRouter", "MASKED", "NWORLD",
    "SWORLD", "SecureStorage", "TraceLog",
]

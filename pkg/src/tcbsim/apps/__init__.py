"""Normal-world demo applications and the scripted user agent."""

from tcbsim.apps.adversary import AdversaryApp, STRATEGIES
from tcbsim.apps.base import AppHarness
from tcbsim.apps.messaging import MessagingApp
from tcbsim.apps.network import SimNetwork
from tcbsim.apps.payments import BrokerService, PaymentApp, PaymentSession
from tcbsim.apps.useragent import UserAgent

__all__ = [
    "AdversaryApp", "AppHarness", "BrokerService", "MessagingApp",
    "PaymentApp", "PaymentSession", "STRATEGIES", "SimNetwork", "UserAgent",
]

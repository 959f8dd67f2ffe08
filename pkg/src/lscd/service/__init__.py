"""HTTP annotation-campaign service.

Serves use pairs to annotators, records judgments in an append-only log,
and lets an operator advance rounds (re-cluster, re-sample) until a word's
change scores are final.
"""

from .app import create_app
from .store import CampaignStore, ServiceError

__all__ = ["create_app", "CampaignStore", "ServiceError"]

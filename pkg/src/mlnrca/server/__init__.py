from .app import create_app
from .store import SessionStore, UnknownModelError, UnknownSessionError

__all__ = ["create_app", "SessionStore", "UnknownModelError", "UnknownSessionError"]

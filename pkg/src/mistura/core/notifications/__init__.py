"""
Notification system for mistura arena events.

This module provides components for observing games and certification
batches without the arena knowing its observers.
"""

from mistura.core.notifications.manager import (
    NotificationManager,
    NotificationType,
    notification_manager,
)

__all__ = ["NotificationManager", "NotificationType", "notification_manager"]

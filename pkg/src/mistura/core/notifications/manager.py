"""
Arena event bus.

Games publish one event per round, an extra event for every flagged round
and a final event when they end; certification publishes one event per
batch. Observers subscribe either to an event type or to one game label.
Delivery is synchronous on the publishing thread, so games played by a
worker pool call their observers from several threads.
"""

import enum
import logging
import threading
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Set

logger = logging.getLogger(__name__)

Callback = Callable[[Dict[str, Any]], None]


class NotificationType(enum.Enum):
    """Arena events."""

    ROUND_PLAYED = "round_played"
    ROUND_FLAGGED = "round_flagged"  # slack below minus the violation tolerance
    GAME_FINISHED = "game_finished"  # completed or aborted
    BATCH_CERTIFIED = "batch_certified"


class NotificationManager:
    """Routes arena events to subscribed callbacks.

    Every delivered event is a fresh dict holding the published data plus
    ``event_type`` and ``timestamp``. A callback that raises is logged and
    counted in ``failed_deliveries``; the remaining callbacks still run.
    """

    def __init__(self):
        self.subscribers: Dict[NotificationType, Set[Callback]] = {
            event_type: set() for event_type in NotificationType
        }
        # Game label -> callbacks, dropped once the game finishes
        self.game_subscribers: Dict[str, Set[Callback]] = {}
        self.failed_deliveries = 0
        self.lock = threading.RLock()

    def subscribe(self, event_type: NotificationType, callback: Callback) -> None:
        with self.lock:
            self.subscribers[event_type].add(callback)

    def unsubscribe(self, event_type: NotificationType, callback: Callback) -> None:
        with self.lock:
            self.subscribers[event_type].discard(callback)

    def subscribe_game(self, game: str, callback: Callback) -> None:
        """Receive every event of the game labelled ``game`` until it finishes."""
        with self.lock:
            self.game_subscribers.setdefault(game, set()).add(callback)
        logger.debug(f"Watching game {game}")

    def _recipients(self, event_type: NotificationType, game: Optional[str]) -> List[Callback]:
        with self.lock:
            recipients = list(self.subscribers[event_type])
            if game is not None and game in self.game_subscribers:
                recipients += [
                    cb for cb in self.game_subscribers[game] if cb not in recipients
                ]
                if event_type is NotificationType.GAME_FINISHED:
                    del self.game_subscribers[game]
        return recipients

    def notify(self, event_type: NotificationType, data: Dict[str, Any]) -> None:
        """Deliver one event to the type's subscribers and to the game's watchers."""
        event = {
            **data,
            "event_type": event_type.value,
            "timestamp": datetime.now().isoformat(),
        }
        for callback in self._recipients(event_type, data.get("game")):
            try:
                callback(dict(event))
            except Exception as e:
                with self.lock:
                    self.failed_deliveries += 1
                logger.error(f"Subscriber of {event_type.value} failed: {e}")


# Shared by the arena when no manager is passed
notification_manager = NotificationManager()

from enum import Enum
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class ActionKind(str, Enum):
    CLICK = "Click"
    DRAG = "Drag"
    SCROLL = "Scroll"
    TYPE = "Type"
    INVERSE = "Inverse"
    RESTORE = "Restore"
    RESET = "Reset"


KIND_RANK = {kind: rank for rank, kind in enumerate(ActionKind)}

FORWARD_KINDS = frozenset(
    {ActionKind.CLICK, ActionKind.DRAG, ActionKind.SCROLL, ActionKind.TYPE}
)
BACKTRACK_KINDS = frozenset({ActionKind.INVERSE, ActionKind.RESTORE, ActionKind.RESET})


class ActionSpec(BaseModel):
    kind: ActionKind
    target: Optional[str] = None
    payload: Optional[str] = None
    inverse_of: Optional[int] = None
    token: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_fields_match_kind(self) -> "ActionSpec":
        populated = {
            name
            for name in ("target", "payload", "inverse_of", "token")
            if getattr(self, name) is not None
        }
        allowed = {
            ActionKind.CLICK: {"target"},
            ActionKind.DRAG: {"target"},
            ActionKind.SCROLL: {"target"},
            ActionKind.TYPE: {"target", "payload"},
            ActionKind.INVERSE: {"inverse_of"},
            ActionKind.RESTORE: {"token"},
            ActionKind.RESET: set(),
        }[self.kind]

        if not populated <= allowed:
            raise ValueError(
                f"{self.kind.value} does not take {sorted(populated - allowed)}"
            )
        if self.kind in (ActionKind.CLICK, ActionKind.DRAG, ActionKind.SCROLL):
            if not self.target:
                raise ValueError(f"{self.kind.value} needs a nonempty target")
        if self.kind == ActionKind.TYPE and self.payload is None:
            raise ValueError("Type needs a payload")
        if self.kind == ActionKind.INVERSE and (
            self.inverse_of is None or self.inverse_of < 0
        ):
            raise ValueError("Inverse needs a step index")
        return self

    # ==================== CONSTRUCTORS ====================
    @classmethod
    def click(cls, target: str) -> "ActionSpec":
        return cls(kind=ActionKind.CLICK, target=target)

    @classmethod
    def drag(cls, target: str) -> "ActionSpec":
        return cls(kind=ActionKind.DRAG, target=target)

    @classmethod
    def scroll(cls, target: str) -> "ActionSpec":
        return cls(kind=ActionKind.SCROLL, target=target)

    @classmethod
    def type_text(cls, target: str, payload: str) -> "ActionSpec":
        return cls(kind=ActionKind.TYPE, target=target, payload=payload)

    @classmethod
    def inverse(cls, step_index: int) -> "ActionSpec":
        return cls(kind=ActionKind.INVERSE, inverse_of=step_index)

    @classmethod
    def restore(cls, token: Optional[str] = None) -> "ActionSpec":
        return cls(kind=ActionKind.RESTORE, token=token)

    @classmethod
    def reset(cls) -> "ActionSpec":
        return cls(kind=ActionKind.RESET)

    # ==================== VIEWS ====================
    @property
    def is_forward(self) -> bool:
        return self.kind in FORWARD_KINDS

    @property
    def sort_key(self) -> Tuple[int, str, str, int, str]:
        # canonical order: kind rank, then target, then payload
        return (
            KIND_RANK[self.kind],
            self.target or "",
            self.payload or "",
            -1 if self.inverse_of is None else self.inverse_of,
            self.token or "",
        )

    @property
    def label(self) -> str:
        if self.kind == ActionKind.TYPE:
            return f"Type#{self.target or ''}={self.payload}"
        if self.kind == ActionKind.INVERSE:
            return f"Inverse@{self.inverse_of}"
        if self.kind == ActionKind.RESTORE:
            return f"Restore:{self.token or ''}"
        if self.kind == ActionKind.RESET:
            return "Reset"
        return f"{self.kind.value}#{self.target}"

    @classmethod
    def from_label(cls, label: str) -> Optional["ActionSpec"]:
        """Parse a forward-action label such as ``Click#save``; None if it is not one."""
        kind_name, sep, rest = label.strip().partition("#")
        if not sep or not rest:
            return None
        try:
            kind = ActionKind(kind_name)
        except ValueError:
            return None
        if kind == ActionKind.TYPE:
            target, eq, payload = rest.partition("=")
            if not eq:
                return None
            return cls(kind=kind, target=target or None, payload=payload)
        if kind not in FORWARD_KINDS:
            return None
        return cls(kind=kind, target=rest)

    def wire(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json", exclude_none=True)
        return dict(sorted(data.items()))

    def __str__(self) -> str:
        return self.label


def canonical_order(actions) -> list:
    return sorted(actions, key=lambda a: a.sort_key)

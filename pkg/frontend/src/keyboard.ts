// Debugger key bindings: b = break, c = continue, arrows step back and
// forward. Only the keys; the speed slider lives in the control panel.

export interface KeyCommand {
  type: "break" | "continue" | "step_back" | "step_fwd";
  payload: Record<string, never>;
}

const KEY_MAP: Record<string, KeyCommand["type"]> = {
  b: "break",
  c: "continue",
  ArrowLeft: "step_back",
  ArrowRight: "step_fwd",
};

export function keyboardCommand(key: string): KeyCommand | null {
  const type = KEY_MAP[key];
  return type ? { type, payload: {} } : null;
}

export interface KeyEventLike {
  key: string;
  target?: unknown;
  preventDefault?: () => void;
}

export interface Sender {
  send(type: string, payload?: Record<string, unknown>): number;
}

// Returns the handler so tests can feed it synthetic key events.
export function bindKeyboard(
  target: { addEventListener(type: "keydown", fn: (e: KeyEventLike) => void): void },
  sender: Sender,
): (e: KeyEventLike) => void {
  const handler = (e: KeyEventLike) => {
    const tag =
      e.target && typeof e.target === "object" && "tagName" in (e.target as object)
        ? String((e.target as { tagName: string }).tagName).toLowerCase()
        : "";
    if (tag === "input" || tag === "textarea" || tag === "select") {
      return; // typing in a form, not steering the debugger
    }
    const command = keyboardCommand(e.key);
    if (command) {
      e.preventDefault?.();
      sender.send(command.type, command.payload);
    }
  };
  target.addEventListener("keydown", handler);
  return handler;
}

import { describe, expect, it, vi } from "vitest";

import { Connection } from "../src/connection.js";
import { Envelope } from "../src/protocol.js";
import { StubServer, StubSocket } from "./stub_server.js";

describe("connection", () => {
  it("creates a session on first open and remembers the id", () => {
    const server = new StubServer();
    const conn = new Connection("ws://stub", server.factory);
    const events: Envelope[] = [];
    conn.onEvent = (e) => events.push(e);
    conn.connect();
    (server.sockets[0] as StubSocket).open();
    expect(server.received[0].type).toBe("create_session");
    expect(conn.session).toBe("s1");
    expect(events.map((e) => e.type)).toEqual(["ack", "session_created"]);
  });

  it("resumes with attach_session after a drop instead of replaying history", () => {
    vi.useFakeTimers();
    try {
      const server = new StubServer();
      const conn = new Connection("ws://stub", server.factory);
      const statuses: string[] = [];
      conn.onStatus = (s) => statuses.push(s);
      conn.connect();
      (server.sockets[0] as StubSocket).open();
      expect(conn.session).toBe("s1");

      (server.sockets[0] as StubSocket).dropFromServer();
      vi.runOnlyPendingTimers(); // reconnect backoff fires
      (server.sockets[1] as StubSocket).open();

      const types = server.received.map((m) => m.type);
      expect(types).toEqual(["create_session", "attach_session"]);
      expect(server.received[1].payload).toEqual({ session_id: "s1" });
      expect(statuses).toEqual(["connecting", "open", "closed", "connecting", "open"]);
    } finally {
      vi.useRealTimers();
    }
  });

  it("sequences commands monotonically across reconnects", () => {
    vi.useFakeTimers();
    try {
      const server = new StubServer();
      const conn = new Connection("ws://stub", server.factory);
      conn.connect();
      (server.sockets[0] as StubSocket).open();
      conn.send("list_maps");
      (server.sockets[0] as StubSocket).dropFromServer();
      vi.runOnlyPendingTimers();
      (server.sockets[1] as StubSocket).open();
      conn.send("list_maps");
      const seqs = server.received.map((m) => m.seq);
      expect([...seqs].sort((a, b) => a - b)).toEqual(seqs);
      expect(new Set(seqs).size).toBe(seqs.length);
    } finally {
      vi.useRealTimers();
    }
  });

  it("close() stops the reconnect loop", () => {
    vi.useFakeTimers();
    try {
      const server = new StubServer();
      const conn = new Connection("ws://stub", server.factory);
      conn.connect();
      (server.sockets[0] as StubSocket).open();
      conn.close();
      vi.runOnlyPendingTimers();
      expect(server.sockets.length).toBe(1); // no new socket spawned
    } finally {
      vi.useRealTimers();
    }
  });
});

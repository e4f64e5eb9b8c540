import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../../src/api";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function clientWith(
  responses: Array<{ status: number; body?: unknown }>,
  recorded: Recorded[],
): ApiClient {
  let call = 0;
  return new ApiClient("http://server", "tok-123", async (url, init) => {
    recorded.push({ url, init });
    const spec = responses[Math.min(call, responses.length - 1)]!;
    call += 1;
    return new Response(
      spec.body === undefined ? null : JSON.stringify(spec.body),
      { status: spec.status, headers: { "Content-Type": "application/json" } },
    );
  });
}

const envelope = {
  item_id: "R1-h000-i003",
  anonymized_text: "work with @SOMEONE HTTP://LINK",
  round_id: "R1",
  question: "Is this tweet about job or employment?",
  context: null,
};

describe("ApiClient", () => {
  it("sends the bearer token on every request", async () => {
    const recorded: Recorded[] = [];
    const client = clientWith([{ status: 200, body: envelope }], recorded);
    await client.nextTask("R1");
    const headers = recorded[0]!.init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer tok-123");
    expect(recorded[0]!.url).toBe("http://server/rounds/R1/next");
  });

  it("parses a task envelope", async () => {
    const client = clientWith([{ status: 200, body: envelope }], []);
    const task = await client.nextTask("R1");
    expect(task?.item_id).toBe("R1-h000-i003");
  });

  it("maps 204 to null (round complete)", async () => {
    const client = clientWith([{ status: 204 }], []);
    expect(await client.nextTask("R1")).toBeNull();
  });

  it("posts labels as JSON", async () => {
    const recorded: Recorded[] = [];
    const ack = {
      status: "stored", worker_id: "w", item_id: "i", answer: "Y", audit_length: 1,
    };
    const client = clientWith([{ status: 200, body: ack }], recorded);
    const result = await client.submitLabel("i", "Y");
    expect(result.audit_length).toBe(1);
    expect(recorded[0]!.init?.method).toBe("POST");
    expect(JSON.parse(String(recorded[0]!.init?.body))).toEqual({
      item_id: "i",
      answer: "Y",
    });
  });

  it("raises ApiError with the server detail", async () => {
    const client = clientWith(
      [{ status: 403, body: { detail: "item not assigned to you" } }],
      [],
    );
    await expect(client.submitLabel("i", "Y")).rejects.toThrowError(ApiError);
    await expect(client.submitLabel("i", "Y")).rejects.toThrow(
      "item not assigned to you",
    );
  });

  it("fetches agreement with the stat query", async () => {
    const recorded: Recorded[] = [];
    const payload = { round_id: "R1", statistic: "fleiss_kappa", undefined: false };
    const client = clientWith([{ status: 200, body: payload }], recorded);
    await client.agreement("R1", "fleiss");
    expect(recorded[0]!.url).toBe("http://server/stats/agreement/R1?stat=fleiss");
  });
});

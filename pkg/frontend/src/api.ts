/**
 * Thin fetch client for the recloop API.
 *
 * All displayed numbers come from these payloads untouched; the client
 * validates outgoing bodies and incoming responses but never recomputes
 * weights or ratings.
 */

import {
  AssessmentBody,
  AssessmentBodySchema,
  CreateSessionBody,
  CreateSessionBodySchema,
  DetailPayload,
  DetailPayloadSchema,
  Efficacy,
  EfficacySchema,
  FeedbackBody,
  FeedbackBodySchema,
  ListPayload,
  ListPayloadSchema,
  QuizBody,
  QuizBodySchema,
  QuizPayload,
  QuizPayloadSchema,
  SatisfactionBody,
  SatisfactionBodySchema,
  SessionCreatedSchema,
} from "./schemas.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
  }
}

let baseUrl = "";

export function configureApi(url: string): void {
  baseUrl = url.replace(/\/$/, "");
}

async function request(
  method: "GET" | "POST",
  path: string,
  body?: unknown,
): Promise<unknown> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
  } catch (err) {
    throw new ApiError(`network failure: ${String(err)}`);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const parsed = (await response.json()) as { detail?: string };
      if (parsed.detail) detail = parsed.detail;
    } catch {
      /* plain-text error body */
    }
    throw new ApiError(detail, response.status);
  }
  return response.json();
}

export async function createSession(body: CreateSessionBody) {
  CreateSessionBodySchema.parse(body);
  return SessionCreatedSchema.parse(await request("POST", "/sessions", body));
}

export async function getRecommendations(sid: string): Promise<ListPayload> {
  return ListPayloadSchema.parse(
    await request("GET", `/sessions/${sid}/recommendations`),
  );
}

export async function nextRecommendations(sid: string): Promise<ListPayload> {
  return ListPayloadSchema.parse(
    await request("POST", `/sessions/${sid}/recommendations:next`),
  );
}

export async function getExplanation(
  sid: string,
  itemId: number,
): Promise<DetailPayload> {
  return DetailPayloadSchema.parse(
    await request("GET", `/sessions/${sid}/items/${itemId}/explanation`),
  );
}

export async function postFeedback(
  sid: string,
  body: FeedbackBody,
): Promise<ListPayload> {
  FeedbackBodySchema.parse(body);
  return ListPayloadSchema.parse(
    await request("POST", `/sessions/${sid}/feedback`, body),
  );
}

export async function postSatisfaction(
  sid: string,
  body: SatisfactionBody,
): Promise<void> {
  SatisfactionBodySchema.parse(body);
  await request("POST", `/sessions/${sid}/satisfaction`, body);
}

export async function getQuiz(sid: string): Promise<QuizPayload> {
  return QuizPayloadSchema.parse(await request("GET", `/sessions/${sid}/quiz`));
}

export async function postQuiz(sid: string, body: QuizBody): Promise<void> {
  QuizBodySchema.parse(body);
  await request("POST", `/sessions/${sid}/quiz`, body);
}

export async function postAssessment(
  sid: string,
  body: AssessmentBody,
): Promise<void> {
  AssessmentBodySchema.parse(body);
  await request("POST", `/sessions/${sid}/assessment`, body);
}

export async function getEfficacy(sid: string): Promise<Efficacy> {
  return EfficacySchema.parse(await request("GET", `/sessions/${sid}/efficacy`));
}

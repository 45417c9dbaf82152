/**
 * Shared request/response schemas for the recloop HTTP API.
 *
 * Every POST body the UI sends is validated against these before the
 * request leaves the client, and the flow tests reuse the same schemas to
 * check what actually went over the wire.
 */

import { z } from "zod";

export const FeatureSchema = z.object({
  kind: z.enum(["genre", "tag", "actor", "director"]),
  name: z.string().min(1),
});

export const OnboardingRatingSchema = z.object({
  item_id: z.number().int(),
  rating: z.number().min(0.5).max(5.0),
});

export const CreateSessionBodySchema = z.object({
  group: z.enum(["feedback", "nonfeedback"]),
  seed: z.number().int(),
  onboarding: z.array(OnboardingRatingSchema).min(5),
  options: z.record(z.unknown()).optional(),
});

export const FeedbackBodySchema = z
  .object({
    trial: z.number().int().positive(),
    item_id: z.number().int(),
    feature: FeatureSchema,
    omega_before: z.number().min(0).max(100),
    omega_after: z.number().min(0).max(100),
  })
  .refine((b) => b.omega_after !== b.omega_before, {
    message: "slider must actually move",
  });

export const SatisfactionBodySchema = z.object({
  trial: z.number().int().positive(),
  item_id: z.number().int(),
  verdict: z.enum(["like", "dislike", "none"]),
});

export const QuizAnswerSchema = z.object({
  judgment: z.enum(["correct", "incorrect"]),
  confidence: z.number().min(1).max(9),
});

export const QuizBodySchema = z.object({
  trial: z.number().int().positive(),
  answers: z.array(QuizAnswerSchema).min(1),
});

export const AssessmentBodySchema = z.object({
  trial: z.number().int().positive(),
  valence: z.number().min(1).max(9),
  dominance: z.number().min(1).max(9),
  mental_demand: z.number().min(0).max(100),
  performance: z.number().min(0).max(100),
  effort: z.number().min(0).max(100),
  frustration: z.number().min(0).max(100),
  efficacy_self_rating: z.number().min(1).max(9),
});

export const ChipSchema = z.object({
  kind: z.string(),
  name: z.string(),
  weight: z.number().min(0).max(100),
});

export const ListItemSchema = z.object({
  item_id: z.number().int(),
  title: z.string(),
  rank: z.number().int().positive(),
  expected_rating: z.number(),
  top_features: z.array(ChipSchema).max(3),
});

export const ListPayloadSchema = z.object({
  session: z.string(),
  group: z.enum(["feedback", "nonfeedback"]),
  trial: z.number().int().positive(),
  sliders_read_only: z.boolean(),
  items: z.array(ListItemSchema),
});

export const SessionCreatedSchema = ListPayloadSchema.extend({
  session_id: z.string(),
});

export const SliderSchema = z.object({
  kind: z.string(),
  name: z.string(),
  weight: z.number().min(0).max(100),
  raw_coefficient: z.number(),
});

export const DetailPayloadSchema = z.object({
  session: z.string(),
  trial: z.number().int().positive(),
  item_id: z.number().int(),
  title: z.string(),
  expected_rating: z.number(),
  sliders_read_only: z.boolean(),
  sliders: z.array(SliderSchema).max(6),
});

export const QuizPayloadSchema = z.object({
  trial: z.number().int().positive(),
  items: z.array(
    z.object({
      index: z.number().int(),
      item_id: z.number().int(),
      title: z.string(),
      feature: FeatureSchema,
    }),
  ),
});

export const EfficacySchema = z.object({
  trial: z.number().int(),
  a: z.number().int().min(0),
  x: z.number(),
  k: z.number().positive(),
  mode: z.string(),
  xi: z.number().min(0),
});

export type Feature = z.infer<typeof FeatureSchema>;
export type ListPayload = z.infer<typeof ListPayloadSchema>;
export type ListItem = z.infer<typeof ListItemSchema>;
export type DetailPayload = z.infer<typeof DetailPayloadSchema>;
export type QuizPayload = z.infer<typeof QuizPayloadSchema>;
export type Efficacy = z.infer<typeof EfficacySchema>;
export type CreateSessionBody = z.infer<typeof CreateSessionBodySchema>;
export type FeedbackBody = z.infer<typeof FeedbackBodySchema>;
export type SatisfactionBody = z.infer<typeof SatisfactionBodySchema>;
export type QuizBody = z.infer<typeof QuizBodySchema>;
export type AssessmentBody = z.infer<typeof AssessmentBodySchema>;

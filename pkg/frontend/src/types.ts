/** Wire formats shared with the recognition service, validated with zod. */

import { z } from "zod";

export const FIELD_TYPES = [
  "Single Line",
  "Multiple Lines",
  "Number",
  "Date",
  "Defined Label",
] as const;

export type FieldType = (typeof FIELD_TYPES)[number];

export const PointSchema = z.tuple([z.number(), z.number()]);
export type Point = z.infer<typeof PointSchema>;

export const TemplateShapeSchema = z
  .object({
    id: z.string().min(1),
    type: z.enum(FIELD_TYPES),
    points: z.array(PointSchema).length(4),
    possibilities: z.array(z.string()).default([]),
  })
  .passthrough();
export type TemplateShapePayload = z.infer<typeof TemplateShapeSchema>;

export const TemplatePayloadSchema = z
  .object({
    shapes: z.array(TemplateShapeSchema),
    imageData: z.string(),
  })
  .passthrough();
export type TemplatePayload = z.infer<typeof TemplatePayloadSchema>;

export const PredictionSchema = z
  .object({
    field_id: z.string(),
    field_type: z.enum(FIELD_TYPES),
    raw_text: z.string(),
    enhanced_text: z.string(),
    line_texts: z.array(z.string()),
    registration: z.string(),
    flags: z.array(z.string()),
  })
  .passthrough();
export type Prediction = z.infer<typeof PredictionSchema>;

export const RegistrationReportSchema = z
  .object({
    method: z.string(),
    n_inliers: z.number(),
    mean_error: z.number(),
    detail: z.string(),
  })
  .passthrough();
export type RegistrationReport = z.infer<typeof RegistrationReportSchema>;

export const PipelineResultSchema = z.object({
  predictions: z.array(PredictionSchema),
  registration: RegistrationReportSchema,
});
export type PipelineResult = z.infer<typeof PipelineResultSchema>;

export const CorrectionSchema = z.object({
  prediction_id: z.string(),
  field_id: z.string(),
  corrected_text: z.string(),
  timestamp: z.string(),
});
export type Correction = z.infer<typeof CorrectionSchema>;

export const PredictionRecordSchema = z.object({
  prediction_id: z.string(),
  template_id: z.string(),
  created_at: z.string(),
  result: PipelineResultSchema,
  corrections: z.array(CorrectionSchema).default([]),
});
export type PredictionRecord = z.infer<typeof PredictionRecordSchema>;

export const ServiceErrorSchema = z.object({
  detail: z.object({ stage: z.string(), message: z.string() }),
});
export type ServiceErrorDetail = z.infer<typeof ServiceErrorSchema>;

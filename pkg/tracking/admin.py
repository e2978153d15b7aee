from django.contrib import admin
from .models import EvaluationRun, FrameRecord


class FrameRecordInline(admin.TabularInline):
    model = FrameRecord
    fields = ['index', 'status', 'x', 'y', 'w', 'h', 'iou', 'centre_error', 'quality']
    readonly_fields = fields
    extra = 0
    can_delete = False
    show_change_link = False

    def has_add_permission(self, request, obj=None):
        return False


@admin.register(EvaluationRun)
class EvaluationRunAdmin(admin.ModelAdmin):
    list_display = ['sequence', 'mode', 'seed', 'ao', 'failures', 'auc', 'fps', 'has_ablations', 'created_at']
    list_filter = ['mode', 'created_at']
    search_fields = ['sequence', 'ablations']
    date_hierarchy = 'created_at'
    readonly_fields = ['created_at']
    inlines = [FrameRecordInline]

    def has_ablations(self, obj):
        return bool(obj.ablations)
    has_ablations.boolean = True
    has_ablations.short_description = 'Ablated'


@admin.register(FrameRecord)
class FrameRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'index', 'status', 'iou', 'centre_error', 'quality']
    list_filter = ['status']
    search_fields = ['run__sequence']

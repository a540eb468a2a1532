from rest_framework import viewsets, status, mixins
from rest_framework.decorators import action
from rest_framework.response import Response
from rest_framework.permissions import IsAuthenticated
from drf_yasg.utils import swagger_auto_schema
from drf_yasg import openapi
from .core_types import DataSet
from .estimation import identify
from .exceptions import IdentificationError, InsufficientDataError, OrderSearchError
from .excitation import design_input, simulate_dataset
from .models import IdentificationRun
from .serializers import (
    GuessDiagnosticsSerializer,
    IdentificationRunSerializer,
    IdentifyRequestSerializer,
    ReportSerializer,
    SimulateRequestSerializer,
    SimulationSerializer,
    load_report_schema,
)
from .permissions import CanRunIdentification, IsOwnerOrAdmin
import logging

logger = logging.getLogger(__name__)


class IdentificationRunViewSet(
    mixins.ListModelMixin,
    mixins.RetrieveModelMixin,
    mixins.DestroyModelMixin,
    viewsets.GenericViewSet
):
    """
    ViewSet for running identifications and browsing stored runs.
    """
    serializer_class = IdentificationRunSerializer
    queryset = IdentificationRun.objects.all()
    permission_classes = [IsAuthenticated, IsOwnerOrAdmin]

    def get_permissions(self):
        """
        Instantiates and returns the list of permissions that this view requires.
        """
        if self.action == 'identify':
            permission_classes = [IsAuthenticated, CanRunIdentification]
        elif self.action in ('simulate', 'report_schema'):
            permission_classes = [IsAuthenticated]
        else:
            permission_classes = [IsAuthenticated, IsOwnerOrAdmin]
        return [permission() for permission in permission_classes]

    def get_queryset(self):
        """
        Returns all active runs.
        """
        return IdentificationRun.objects.all()

    def perform_destroy(self, instance):
        """
        Soft delete a run and record who removed it.
        """
        instance.delete(updated_by=self.request.user)
        logger.info(f"Run {instance.pk} deactivated by {self.request.user}")

    @swagger_auto_schema(
        operation_description="List identification runs with pagination",
        manual_parameters=[
            openapi.Parameter(
                'page',
                openapi.IN_QUERY,
                description="Page number for pagination",
                type=openapi.TYPE_INTEGER,
                default=1
            )
        ],
        responses={
            200: IdentificationRunSerializer(many=True),
            401: "Authentication credentials were not provided",
        }
    )
    def list(self, request, *args, **kwargs):
        return super().list(request, *args, **kwargs)

    @swagger_auto_schema(
        operation_description="Soft delete a run (owner or admin only)",
        responses={
            204: "Deleted",
            401: "Unauthorized",
            403: "Permission denied",
            404: "Not Found"
        }
    )
    def destroy(self, request, *args, **kwargs):
        return super().destroy(request, *args, **kwargs)

    @swagger_auto_schema(
        operation_description="Identify an ARX model from input/output samples",
        request_body=IdentifyRequestSerializer,
        responses={
            201: IdentificationRunSerializer,
            400: "Bad Request",
            401: "Unauthorized",
            403: "Permission denied",
            422: "No order accepted or numerical failure"
        }
    )
    @action(detail=False, methods=['post'])
    def identify(self, request):
        """Run the order search and parameter estimation on posted data."""
        serializer = IdentifyRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(
                serializer.errors,
                status=status.HTTP_400_BAD_REQUEST
            )

        validated_data = serializer.validated_data
        data = DataSet(u=validated_data['u'], y=validated_data['y'])
        if validated_data['detrend']:
            data = data.detrended()

        run = IdentificationRun(
            name=validated_data['name'],
            sample_count=data.n_samples,
            created_by=request.user,
            updated_by=request.user,
        )
        try:
            report = identify(data, validated_data['config'])
        except InsufficientDataError as e:
            return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)
        except OrderSearchError as e:
            logger.error(f"Run '{run.name}' failed: {str(e)}")
            run.status = IdentificationRun.STATUS_FAILED
            run.error_message = str(e)
            run.report = {'guesses': GuessDiagnosticsSerializer(e.guesses, many=True).data}
            run.save()
            return Response(
                {'error': str(e), 'run': self.get_serializer(run).data},
                status=status.HTTP_422_UNPROCESSABLE_ENTITY
            )
        except IdentificationError as e:
            logger.error(f"Run '{run.name}' failed: {str(e)}")
            return Response({'error': str(e)}, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

        run.status = IdentificationRun.STATUS_ACCEPTED
        run.eta_hat = report.eta_hat
        run.d_hat = report.d_hat
        run.converged = report.converged
        run.report = ReportSerializer(report).data
        run.save()
        logger.info(f"Run '{run.name}' accepted eta_hat={report.eta_hat} on {data.n_samples} samples")
        return Response(self.get_serializer(run).data, status=status.HTTP_201_CREATED)

    @swagger_auto_schema(
        operation_description="Simulate an ARX process driven by a PRBS input",
        request_body=SimulateRequestSerializer,
        responses={
            200: SimulationSerializer,
            400: "Bad Request",
            401: "Unauthorized"
        }
    )
    @action(detail=False, methods=['post'])
    def simulate(self, request):
        """Generate a simulated data set."""
        serializer = SimulateRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(
                serializer.errors,
                status=status.HTTP_400_BAD_REQUEST
            )

        validated_data = serializer.validated_data
        try:
            u = design_input(
                n_samples=validated_data.get('n'),
                prbs_order=validated_data.get('prbs_order'),
            )
            result = simulate_dataset(
                validated_data['model'],
                u,
                snr=validated_data.get('snr'),
                sigma_e2=validated_data.get('sigma_e2'),
                reference=validated_data['snr_reference'],
                seed=validated_data['seed'],
                burn_in=validated_data['burn_in'],
                allow_unstable=validated_data['allow_unstable'],
            )
        except IdentificationError as e:
            return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)

        return Response(SimulationSerializer(result).data, status=status.HTTP_200_OK)

    @swagger_auto_schema(
        operation_description="JSON Schema of the identification report",
        responses={200: "JSON Schema document"}
    )
    @action(detail=False, methods=['get'], url_path='report-schema')
    def report_schema(self, request):
        """Versioned schema of the report embedded in every run."""
        return Response(load_report_schema(), status=status.HTTP_200_OK)
